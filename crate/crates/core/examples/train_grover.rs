//! Train a schedule for 4-qubit easy Grover with the published defaults,
//! stopping at the first reward above the threshold, then compare it with
//! the linear schedule.

use adiabatic_rl::experiments::{evaluate_schedule, run_training, ScheduleSource, TrainRun};
use adiabatic_rl::problems::ProblemFamily;

fn main() -> adiabatic_rl::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let family = ProblemFamily::GroverEasy { n_qubits: 4 };
    let mut run = TrainRun::new(family, 62.2, seed);
    run.halt_on_threshold = true;
    let evolution = run.evolution;
    let out = run_training(run)?;
    let high = out.trace.iter().filter(|r| r.reward > 0.99).count();
    println!("iterations:          {}", out.trace.len());
    println!("threshold reached:   {:?}", out.threshold_iteration);
    println!("visits above 0.99:   {high}");
    println!("best path:           {}", out.best_path);
    let linear = evaluate_schedule(&ScheduleSource::linear(6), family, 62.2, &evolution, 1, 0)?.mean;
    println!("success: trained {:.6}, linear {linear:.6}", out.best_reward);
    Ok(())
}
