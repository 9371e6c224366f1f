//! End-to-end training, evaluation campaigns, statistics, and artifact output.

mod evaluation;
pub mod output;
pub mod stats;
mod training;

pub use evaluation::{
    evaluate_schedule, evaluation_seed, grover_fidelity_table, grover_total_time, infidelity_campaign,
    pooled_second_moment, spectrum_hamiltonians, spectrum_trace, transfer_study, Evaluation, FidelityRow, InfidelityStats, InstanceOutcome,
    ScheduleKind, ScheduleSource, SpectrumCurve, SpectrumTrace, TransferRow, GROVER_BENCHMARK,
};
pub use training::{
    run_training, Checkpoint, TraceRecord, TrainRun, Trainer, TrainerState, TrainingOutcome, CHECKPOINT_FORMAT_VERSION,
};
