//! JSON wire formats for bodies and orbits.
//!
//! Body: `{"dim": 4, "halfspaces": [{"normal": [...], "height": h}, ...]}` or
//! `{"dim": 4, "vertices": [[...], ...]}`. The writer emits facets in
//! canonical (lexicographic-by-normal) order.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::orbit::{ClosedOrbit, OrbitEdge};
use crate::polytope::{HPolytope, VPolytope};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HalfspaceJson {
    pub normal: Vec<f64>,
    pub height: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BodyJson {
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<HalfspaceJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
}

impl BodyJson {
    pub fn from_h(body: &HPolytope) -> Self {
        let canon = body.canonicalized();
        BodyJson {
            dim: canon.dim(),
            halfspaces: Some(
                canon
                    .facets()
                    .iter()
                    .map(|f| HalfspaceJson {
                        normal: f.normal.iter().copied().collect(),
                        height: f.height,
                    })
                    .collect(),
            ),
            vertices: None,
        }
    }

    pub fn from_v(body: &VPolytope) -> Self {
        BodyJson {
            dim: body.dim(),
            halfspaces: None,
            vertices: Some(body.vertices().iter().map(|v| v.iter().copied().collect()).collect()),
        }
    }

    pub fn to_polytope(&self) -> Result<HPolytope> {
        match (&self.halfspaces, &self.vertices) {
            (Some(hs), _) => HPolytope::new(
                self.dim,
                hs.iter()
                    .map(|h| (DVector::from_vec(h.normal.clone()), h.height))
                    .collect(),
            ),
            (None, Some(verts)) => VPolytope::new(
                self.dim,
                verts.iter().map(|v| DVector::from_vec(v.clone())).collect(),
            )?
            .facets(),
            (None, None) => Err(Error::InvalidArgument(
                "body JSON needs either halfspaces or vertices".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitEdgeJson {
    pub facet: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitJson {
    pub vertices: Vec<Vec<f64>>,
    pub edges: Vec<OrbitEdgeJson>,
    pub action: f64,
}

impl OrbitJson {
    pub fn from_orbit(orbit: &ClosedOrbit) -> Self {
        OrbitJson {
            vertices: orbit.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
            edges: orbit
                .edges
                .iter()
                .map(|e| OrbitEdgeJson { facet: e.facet, weight: e.weight })
                .collect(),
            action: orbit.action,
        }
    }

    /// Rebuild the orbit; edge vectors come from consecutive vertices.
    pub fn to_orbit(&self) -> Result<ClosedOrbit> {
        if self.vertices.len() != self.edges.len() || self.vertices.is_empty() {
            return Err(Error::InvalidArgument("orbit JSON vertex/edge mismatch".into()));
        }
        let vertices: Vec<DVector<f64>> =
            self.vertices.iter().map(|v| DVector::from_vec(v.clone())).collect();
        let k = vertices.len();
        let edges = (0..k)
            .map(|i| {
                let vector = &vertices[(i + 1) % k] - &vertices[i];
                OrbitEdge { facet: self.edges[i].facet, weight: self.edges[i].weight, vector }
            })
            .collect();
        Ok(ClosedOrbit { vertices, edges, action: self.action })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies;
    use crate::solver::CapacitySequence;

    #[test]
    fn body_round_trip() {
        let y = bodies::y_body().unwrap();
        let json = serde_json::to_string(&BodyJson::from_h(&y)).unwrap();
        let parsed: BodyJson = serde_json::from_str(&json).unwrap();
        let back = parsed.to_polytope().unwrap();
        assert_eq!(back.facet_count(), y.facet_count());
        assert_eq!(serde_json::to_string(&BodyJson::from_h(&back)).unwrap(), json);
    }

    #[test]
    fn vertex_body_parses() {
        let json = r#"{"dim": 2, "vertices": [[0,0],[1,0],[1,1],[0,1]]}"#;
        let parsed: BodyJson = serde_json::from_str(json).unwrap();
        assert_eq!(parsed.to_polytope().unwrap().facet_count(), 4);
    }

    #[test]
    fn sequence_wire_format() {
        let seq = CapacitySequence::new(vec![(6, 1.0), (0, 0.5)]);
        let json = serde_json::to_string(&seq).unwrap();
        assert_eq!(json, r#"{"entries":[{"facet":6,"beta":1.0},{"facet":0,"beta":0.5}]}"#);
        let back: CapacitySequence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, seq);
    }
}
