//! Anneal easy and hard Grover with the linear schedule, check the two-level
//! reduction against the full state vector, and print the minimum gaps.

use adiabatic_rl::problems::{GroverInstance, GroverVariant};
use adiabatic_rl::quantum::{easy_grover_gap, evolve, evolve_two_level, exact_spectrum, EvolutionSettings, StateVector};

fn main() -> adiabatic_rl::Result<()> {
    let linear = |x: f64| x;
    println!(" n      T    full         two-level    |diff|     drift");
    for (n, t) in [(2, 31.1), (4, 62.2), (6, 124.5), (8, 248.9)] {
        let settings = EvolutionSettings::new(t)?;
        let g = GroverInstance::new(n, 0, GroverVariant::Easy)?;
        let pair = g.build_hamiltonians()?;
        let full = evolve(&pair, &linear, &settings, &StateVector::uniform(n)?)?;
        let p_full = g.success_probability(&full.state);
        let p_two = evolve_two_level(n, &linear, &settings)?.success_probability();
        println!("{n:2} {t:6.1}    {p_full:.9}  {p_two:.9}  {:.1e}    {:.1e}", (p_full - p_two).abs(), full.norm_drift);
    }

    println!("\nminimum gap at s = 1/2 (easy Grover) against 2^(-n/2):");
    for n in [2, 4, 6, 8, 10] {
        let pair = GroverInstance::new(n, 0, GroverVariant::Easy)?.build_hamiltonians()?;
        let e = exact_spectrum(&pair, 0.5, 2)?;
        println!("n = {n:2}: ED {:.10}  analytic {:.10}", e[1] - e[0], easy_grover_gap(n, 0.5));
    }

    let n = 6;
    let hard = GroverInstance::new(n, 0, GroverVariant::Hard)?;
    let out = evolve(&hard.build_hamiltonians()?, &linear, &EvolutionSettings::new(124.5)?, &StateVector::uniform(n)?)?;
    println!("\nhard Grover n = {n}, T = 124.5, linear: success {:.6}", hard.success_probability(&out.state));
    Ok(())
}
