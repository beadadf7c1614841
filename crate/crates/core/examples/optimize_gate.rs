//! Minimal library round trip: set up the reference Hadamard problem and run
//! the adaptive gradient search (same snippet as in the README).

use qugrape::{
    adaptive_grape, canonical_basis, default_initial_controls, gate_h, ControlGridF64,
    GateProblemF64, OptimizerConfigF64, QuadratureConfig, SystemParamsF64,
};

fn main() -> qugrape::Result<()> {
    let params = SystemParamsF64::new(1.0, 0.1, 0.01)?;
    let grid = ControlGridF64::uniform(5.0, 10)?;
    let problem =
        GateProblemF64::for_gate(params, grid.clone(), &gate_h(), canonical_basis().to_vec())?;
    let initial = default_initial_controls(&grid);
    let result = adaptive_grape(
        &problem,
        &initial,
        &OptimizerConfigF64::default(),
        &QuadratureConfig::default(),
    )?;
    println!(
        "{}: F = {:.3e} after {} iterations",
        result.stop_reason,
        result.final_objective,
        result.history.len()
    );
    Ok(())
}
