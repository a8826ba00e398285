use ehz::{bodies, orbit, solver};

fn main() {
    let y = bodies::y_body().unwrap();
    let r = solver::capacity(&y, &solver::SolverConfig::bnb()).unwrap();
    for (mi, m) in r.maximizers.iter().enumerate() {
        let mut seqs = vec![("max", m.sequence.clone())];
        if let Some(samples) = &m.family_samples {
            for (si, s) in samples.iter().enumerate() {
                seqs.push((if si == 0 { "ctr" } else { "end" }, s.clone()));
            }
        }
        for (kind, seq) in seqs {
            match orbit::orbit_from_sequence(&y, &seq) {
                Ok(_) => {}
                Err(e) => {
                    println!("maximizer {mi} [{kind}] FAILS: {e}");
                    println!("  entries: {:?}", seq.entries);
                    let report = solver::sequence_feasible(&y, &seq, 1e-7).unwrap();
                    println!("  feasible={} closing={:.2e} norm={:.2e} value={:.15}",
                        report.feasible, report.closing_residual, report.normalization_residual,
                        solver::sequence_action(&y, &seq).unwrap());
                }
            }
        }
    }
    println!("done");
}
