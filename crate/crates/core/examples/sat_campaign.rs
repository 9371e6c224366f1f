//! Random 3-SAT on 10 bits at T = 6: sample an instance, solve it by brute
//! force, then collect linear-schedule infidelity statistics per clause
//! number and compare the rescaled second moment with the GOE surmise.

use adiabatic_rl::experiments::{infidelity_campaign, pooled_second_moment, stats};
use adiabatic_rl::problems::sample_sat_instance;
use adiabatic_rl::quantum::EvolutionConfig;

fn main() -> adiabatic_rl::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let inst = sample_sat_instance(10, 4, 1)?;
    println!("instance: {}", inst.to_json()?);
    println!("solutions: {:?}", inst.solve_brute_force()?);

    let evolution = EvolutionConfig::minimal();
    let clauses = [1, 2, 3, 4, 5, 6];
    let blocks = infidelity_campaign(&|x: f64| x, 10, 6.0, &clauses, samples, 7, &evolution)?;
    for b in &blocks {
        println!(
            "N_C = {}: success {:.5} ± {:.5}  <x²> = {:.4} ± {:.4}  unsatisfiable {}",
            b.n_clauses, b.mean_success, b.success_se, b.second_moment, b.second_moment_se, b.unsatisfiable
        );
    }
    let groups: Vec<&[f64]> = blocks[1..].iter().map(|b| b.samples.as_slice()).collect();
    let (m, se) = pooled_second_moment(&groups, stats::BOOTSTRAP_RESAMPLES, 7)?;
    println!("pooled over N_C = 2..6: {m:.4} ± {se:.4} (GOE {:.4})", stats::GOE_SECOND_MOMENT);
    Ok(())
}
