//! Interrupt a training run, save a checkpoint, resume it, and confirm the
//! result matches an uninterrupted run.

use adiabatic_rl::experiments::{run_training, Checkpoint, TrainRun, Trainer};
use adiabatic_rl::problems::ProblemFamily;

fn main() -> adiabatic_rl::Result<()> {
    let mut run = TrainRun::new(ProblemFamily::GroverEasy { n_qubits: 3 }, 44.0, 5);
    run.agent.l_sa = 4;
    run.agent.l_ps = 50;
    let whole = run_training(run.clone())?;

    let dir = std::env::temp_dir().join("adiabatic-rl-checkpoint-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("checkpoint.json");
    let mut first = Trainer::new(run)?;
    for _ in 0..120 {
        first.step()?;
    }
    first.checkpoint().save(&path)?;
    println!("saved after {} iterations to {}", first.state().iteration, path.display());

    let mut resumed = Trainer::resume(Checkpoint::load(&path)?)?;
    let rest = resumed.run(None, None)?;
    println!("resumed for {} more iterations", rest.trace.len());
    println!("uninterrupted best {:.9} at {}", whole.best_reward, whole.best_path);
    println!("resumed       best {:.9} at {}", rest.best_reward, rest.best_path);
    assert_eq!(whole.final_path, rest.final_path);
    assert_eq!(whole.trace[120..], rest.trace[..]);
    println!("identical continuation");
    Ok(())
}
