//! Instantaneous ground and first excited levels with the dynamical energy
//! for hard Grover at 6 qubits under the linear schedule. Writes
//! `spectrum.csv` to the directory given as argument.

use std::path::PathBuf;

use adiabatic_rl::experiments::{output, spectrum_trace, ScheduleKind};
use adiabatic_rl::problems::ProblemFamily;
use adiabatic_rl::quantum::EvolutionConfig;
use adiabatic_rl::schedule::Schedule;

fn main() -> adiabatic_rl::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/spectrum".into()));
    let linear = |x: f64| x;
    let schedules: [&(dyn Schedule + Sync); 1] = [&linear];
    let trace = spectrum_trace(ProblemFamily::GroverHard { n_qubits: 6 }, 0, &schedules, 124.5, 51, &EvolutionConfig::default())?;
    let c = &trace.curves[0];
    for k in (0..trace.t_over_t.len()).step_by(5) {
        println!(
            "t/T = {:.2}  E0 = {:8.5}  E1 = {:8.5}  <H> = {:8.5}",
            trace.t_over_t[k], c.e0[k], c.e1[k], c.dynamical[k]
        );
    }
    output::write_spectrum_csv(&dir.join("spectrum.csv"), &trace, &[ScheduleKind::Linear])?;
    println!("wrote {}", dir.join("spectrum.csv").display());
    Ok(())
}
