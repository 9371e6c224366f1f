//! Linear and Roland–Cerf schedules at the benchmark sizes, with
//! `T ∝ √(2^n)`. Writes `fidelity.csv` to the directory given as argument.

use std::path::PathBuf;

use adiabatic_rl::experiments::{grover_fidelity_table, output, GROVER_BENCHMARK};
use adiabatic_rl::quantum::EvolutionConfig;

fn main() -> adiabatic_rl::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/baselines".into()));
    let rows = grover_fidelity_table(&GROVER_BENCHMARK, None, &EvolutionConfig::default())?;
    for r in &rows {
        println!("n = {:2}  T = {:6.1}  {:12} {:.6}", r.n, r.total_time, r.schedule_kind.as_str(), r.success_probability);
    }
    output::write_fidelity_csv(&dir.join("fidelity.csv"), &rows)?;
    println!("wrote {}", dir.join("fidelity.csv").display());
    Ok(())
}
