//! Core–periphery effects: baseline predicates, combination sweeps with
//! bootstrap intervals, the complexity curve and best/worst tables.

mod baseline;
mod curve;
mod effect;
mod table;

pub use baseline::{
    all_valid_vectors, default_baselines, is_consistent, BaselinePredicate, CodeGroup,
};
pub use curve::{complexity_curve, ComplexityCurve, CurvePoint};
pub use effect::{
    combination_key, enumerate_combinations, evaluate_combination, sort_effects, sweep,
    sweep_scoped, BaselineData, CellStyle, CombinationEffect, SweepParams, WithoutRule,
    DEFAULT_BUDGET, DEFAULT_K_MAX, DEFAULT_MIN_N,
};
pub use table::{
    extremes, extremes_table, format_cell, write_effects_csv, write_extremes_csv, ExtremesRow,
    Polarity, DEFAULT_TOP, EMPTY_CELL,
};

#[cfg(test)]
mod tests;
