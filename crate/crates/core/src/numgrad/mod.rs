//! Dense-matrix numerics with reverse-mode differentiation and a
//! finite-difference gradient checker.
//!
//! The split is deliberate: [`tensor`] holds plain value kernels, [`tape`]
//! records compositions of those kernels for the backward pass, and [`nn`]
//! builds layers/optimisers on top. Taped forward evaluation calls the same
//! kernels as untaped evaluation, so the two are bit-identical.

pub mod nn;
pub mod tape;
pub mod tensor;

pub use tape::{Gradients, Tape, TapeTensor};
pub use tensor::{Activation, Tensor};

/// Compares reverse-mode gradients against central finite differences.
///
/// `f` must rebuild the same computation whenever it is handed a tape and
/// one handle per entry of `params`, returning a scalar loss node. Returns
/// the worst relative error
/// `|g_analytic − g_numeric| / max(|g_analytic|, |g_numeric|, 1e-8)` over
/// every parameter element, using central differences with step `h`.
pub fn finite_diff_check<F>(params: &[Tensor], h: f64, f: F) -> f64
where
    F: Fn(&mut Tape, &[TapeTensor]) -> TapeTensor,
{
    assert!(h > 0.0, "finite-difference step must be positive");

    let mut tape = Tape::new();
    let handles: Vec<TapeTensor> = params.iter().map(|p| tape.param(p)).collect();
    let loss = f(&mut tape, &handles);
    let grads = tape.backward(loss);
    let analytic: Vec<Tensor> = handles.iter().map(|h| grads.for_param(*h)).collect();

    let eval = |variant: &[Tensor]| -> f64 {
        let mut tape = Tape::new();
        let handles: Vec<TapeTensor> = variant.iter().map(|p| tape.param(p)).collect();
        let loss = f(&mut tape, &handles);
        tape.value(loss).scalar()
    };

    let mut worst = 0.0_f64;
    for i in 0..params.len() {
        for j in 0..params[i].len() {
            let mut plus = params.to_vec();
            plus[i].data_mut()[j] += h;
            let mut minus = params.to_vec();
            minus[i].data_mut()[j] -= h;
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * h);
            let ga = analytic[i].data()[j];
            let denom = ga.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((ga - numeric).abs() / denom);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use nn::Mlp;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn square_gradient_matches_finite_difference() {
        // loss = w^2 at w = 3 -> dloss/dw = 6.
        let w = Tensor::row(&[3.0]);
        let err = finite_diff_check(std::slice::from_ref(&w), 1e-5, |tape, hs| {
            let prod = tape.matmul(hs[0], hs[0]);
            tape.sum(prod)
        });
        assert!(err < 1e-7, "relative error {err}");

        let mut tape = Tape::new();
        let h = tape.param(&w);
        let prod = tape.matmul(h, h);
        let loss = tape.sum(prod);
        let grads = tape.backward(loss);
        assert!((grads.for_param(h).data()[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_gradient_at_origin_is_one() {
        let x = Tensor::row(&[0.0]);
        let err = finite_diff_check(std::slice::from_ref(&x), 1e-5, |tape, hs| {
            let y = tape.activation(hs[0], Activation::Tanh);
            tape.sum(y)
        });
        assert!(err < 1e-9, "relative error {err}");

        let mut tape = Tape::new();
        let h = tape.param(&x);
        let y = tape.activation(h, Activation::Tanh);
        let loss = tape.sum(y);
        let grads = tape.backward(loss);
        assert_eq!(grads.for_param(h).data()[0], 1.0);
    }

    #[test]
    fn loss_ignoring_parameters_has_zero_error() {
        let w = Tensor::row(&[5.0, -2.0]);
        let err = finite_diff_check(&[w], 1e-5, |tape, _| {
            let c = tape.constant(&Tensor::row(&[4.0]));
            tape.sum(c)
        });
        assert_eq!(err, 0.0);
    }

    #[test]
    fn softmax_mse_chain_matches_finite_difference() {
        let x = Tensor::from_rows(&[vec![0.2, -1.0, 0.7], vec![2.0, 0.0, -0.5]]);
        let target = Tensor::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.5, 0.5]]);
        let err = finite_diff_check(&[x], 1e-5, |tape, hs| {
            let s = tape.softmax_rows(hs[0]);
            let t = tape.constant(&target);
            tape.mse(s, t)
        });
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn structural_ops_match_finite_difference() {
        // Exercises concat_cols, stack_rows, flatten_row, scale, and mean in
        // one composite graph.
        let a = Tensor::from_rows(&[vec![0.4, -0.9]]);
        let b = Tensor::from_rows(&[vec![1.5]]);
        let err = finite_diff_check(&[a, b], 1e-5, |tape, hs| {
            let joined = tape.concat_cols(hs[0], hs[1]);
            let doubled = tape.scale(joined, 2.0);
            let stacked = tape.stack_rows(&[joined, doubled]);
            let act = tape.activation(stacked, Activation::Tanh);
            let flat = tape.flatten_row(act);
            tape.mean(flat)
        });
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn mse_gradients_flow_to_both_sides() {
        let p = Tensor::row(&[1.0, 2.0, 3.0]);
        let t = Tensor::row(&[0.5, 2.5, -1.0]);
        let err = finite_diff_check(&[p, t], 1e-5, |tape, hs| tape.mse(hs[0], hs[1]));
        assert!(err < 1e-7, "relative error {err}");
    }

    #[test]
    fn relu_mlp_gradients_check_over_twenty_seeds() {
        // Fixed seeds keep inputs away from the kink at zero where central
        // differences are undefined for relu.
        for seed in 0..20u64 {
            let mut rng = substream(seed, "relu-mlp-check");
            let mlp = Mlp::new(&[3, 8, 8, 2], Activation::Relu, Activation::Identity, &mut rng);
            let x = Tensor::row(&[
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]);
            let target = Tensor::row(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            let err = finite_diff_check(&mlp.param_values(), 1e-5, |tape, hs| {
                let xin = tape.constant(&x);
                let t = tape.constant(&target);
                let y = mlp.forward_given(tape, hs, xin);
                tape.mse(y, t)
            });
            assert!(err < 1e-4, "seed {seed}: relative error {err}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_smooth_mlps_match_finite_difference(
            seed in 0u64..10_000,
            input_size in 1usize..5,
            hidden in 1usize..7,
            output_size in 1usize..4,
            depth in 1usize..4,
        ) {
            let mut rng = substream(seed, "proptest-mlp-check");
            let mut sizes = vec![input_size];
            sizes.extend(std::iter::repeat_n(hidden, depth));
            sizes.push(output_size);
            let mlp = Mlp::new(&sizes, Activation::Tanh, Activation::Identity, &mut rng);
            let x_data: Vec<f64> = (0..input_size).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t_data: Vec<f64> = (0..output_size).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x = Tensor::from_vec(1, input_size, x_data);
            let target = Tensor::from_vec(1, output_size, t_data);
            let err = finite_diff_check(&mlp.param_values(), 1e-5, |tape, hs| {
                let xin = tape.constant(&x);
                let t = tape.constant(&target);
                let y = mlp.forward_given(tape, hs, xin);
                tape.mse(y, t)
            });
            prop_assert!(err < 1e-4, "relative error {}", err);
        }

        #[test]
        fn sum_gradient_is_all_ones(rows in 1usize..6, cols in 1usize..6, seed in 0u64..1000) {
            let mut rng = substream(seed, "sum-grad");
            let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-5.0..5.0)).collect();
            let w = Tensor::from_vec(rows, cols, data);
            let mut tape = Tape::new();
            let h = tape.param(&w);
            let loss = tape.sum(h);
            let grads = tape.backward(loss);
            prop_assert_eq!(grads.for_param(h), Tensor::filled(rows, cols, 1.0));
        }

        #[test]
        fn softmax_rows_stay_on_simplex(
            rows in 1usize..5,
            cols in 1usize..6,
            seed in 0u64..1000,
        ) {
            let mut rng = substream(seed, "softmax-simplex");
            let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-50.0..50.0)).collect();
            let s = Tensor::from_vec(rows, cols, data).softmax_rows();
            for r in 0..rows {
                let mut total = 0.0;
                for c in 0..cols {
                    let v = s.get(r, c);
                    prop_assert!((0.0..=1.0).contains(&v));
                    total += v;
                }
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
