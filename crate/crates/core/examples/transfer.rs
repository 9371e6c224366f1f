//! Train briefly at 10 qubits, apply the best path to 11..16 qubits with
//! `T ∝ √(2^n)`, then warm-start a short training run at 11 qubits from the
//! 10-qubit checkpoint.

use adiabatic_rl::experiments::{grover_total_time, transfer_study, TrainRun, Trainer};
use adiabatic_rl::problems::ProblemFamily;
use adiabatic_rl::quantum::EvolutionConfig;

fn main() -> adiabatic_rl::Result<()> {
    let mut run = TrainRun::new(ProblemFamily::GroverEasy { n_qubits: 10 }, 497.8, 0);
    run.agent.l_sa = 20;
    run.agent.l_ps = 50;
    run.halt_on_threshold = true;
    let mut source = Trainer::new(run)?;
    let out = source.run(None, None)?;
    println!("10 qubits: best {:.6} after {} iterations", out.best_reward, out.trace.len());

    for r in transfer_study(&out.best_path, 10, 497.8, &[11, 12, 13, 14, 15, 16], &EvolutionConfig::default())? {
        println!("n = {:2}  T = {:7.1}  infidelity rl {:.3e}  linear {:.3e}", r.n, r.total_time, r.rl_infidelity, r.linear_infidelity);
    }

    let mut warm = TrainRun::new(ProblemFamily::GroverEasy { n_qubits: 11 }, grover_total_time(11), 1);
    warm.agent.l_sa = 10;
    warm.agent.l_ps = 50;
    warm.halt_on_threshold = true;
    let w = Trainer::warm_start(warm, &source.checkpoint())?.run(None, None)?;
    println!("11 qubits, warm start: best {:.6}, threshold at {:?}", w.best_reward, w.threshold_iteration);
    Ok(())
}
