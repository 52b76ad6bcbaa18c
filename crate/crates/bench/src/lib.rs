//! Benchmark fixtures shared by the criterion targets.

use levelset_core::models::{builtin_model, Sample};

/// Sorted triangular sample of size `n`.
pub fn triangular_sample(n: usize, seed: u64) -> Vec<f64> {
    let model = builtin_model("triangular1d", 0.5).expect("valid model");
    match model.sample(n, seed) {
        Sample::Line(mut xs) => {
            xs.sort_by(f64::total_cmp);
            xs
        }
        Sample::Plane(_) => unreachable!("1D model"),
    }
}

/// Cone-model planar sample of size `n`.
pub fn cone_sample(n: usize, seed: u64) -> Sample {
    builtin_model("cone2d", 0.3)
        .expect("valid model")
        .sample(n, seed)
}
