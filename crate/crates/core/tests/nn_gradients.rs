use certnav::nn::{sgd_step, Dense, Mlp};
use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn param_count(net: &Mlp) -> usize {
    net.num_parameters()
}

/// Mutable reference to the `i`-th parameter in flatten order (weights
/// row-major, then bias, layer by layer).
fn param_mut(net: &mut Mlp, mut i: usize) -> &mut f64 {
    for layer in net.layers_mut() {
        let nw = layer.weights.len();
        if i < nw {
            return layer.weights.as_slice_mut().expect("standard layout").get_mut(i).unwrap();
        }
        i -= nw;
        let nb = layer.bias.len();
        if i < nb {
            return &mut layer.bias[i];
        }
        i -= nb;
    }
    panic!("parameter index out of range");
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[test]
fn parameter_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n_in = rng.gen_range(1..5);
        let hidden = rng.gen_range(2..9);
        let n_out = rng.gen_range(1..4);
        let depth = rng.gen_range(1..4);
        let mut dims = vec![n_in];
        dims.extend(std::iter::repeat(hidden).take(depth - 1));
        dims.push(n_out);
        let mut net = Mlp::new(&dims, &mut rng);
        for layer in net.layers_mut() {
            layer.bias.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
        }
        let x: Vec<f64> = (0..n_in).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let up: Vec<f64> = (0..n_out).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let (tape, _) = net.backward(&x, &up);
        let analytic = tape.flatten();
        let mut numeric = Vec::with_capacity(analytic.len());
        for i in 0..param_count(&net) {
            let p0 = *param_mut(&mut net, i);
            *param_mut(&mut net, i) = p0 + eps;
            let plus = dot(&net.forward(&x), &up);
            *param_mut(&mut net, i) = p0 - eps;
            let minus = dot(&net.forward(&x), &up);
            *param_mut(&mut net, i) = p0;
            numeric.push((plus - minus) / (2.0 * eps));
        }
        let err = rel_error(&analytic, &numeric);
        worst = worst.max(err);
        assert!(err < 1e-4, "case {case}: relative error {err:e} for dims {dims:?}");
    }
    println!("worst relative error over 100 nets: {worst:e}");
}

#[test]
fn input_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let eps = 1e-5;
    for case in 0..100 {
        let net = Mlp::new(&[3, 16, 16, 2], &mut rng);
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let up = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let (_, dx) = net.backward(&x, &up);
        let numeric: Vec<f64> = (0..3)
            .map(|j| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += eps;
                xm[j] -= eps;
                (dot(&net.forward(&xp), &up) - dot(&net.forward(&xm), &up)) / (2.0 * eps)
            })
            .collect();
        let err = rel_error(&dx, &numeric);
        assert!(err < 1e-4, "case {case}: relative error {err:e}");
    }
}

#[test]
fn zero_network_outputs_zero() {
    let net = Mlp::zeros(&[4, 8, 3]);
    assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5]), vec![0.0; 3]);
}

#[test]
fn identity_layer_is_linear() {
    let layer = Dense {
        weights: Array2::eye(2),
        bias: Array1::zeros(2),
    };
    let net = Mlp::from_layers(vec![layer]).unwrap();
    assert_eq!(net.forward(&[1.0, -1.0]), vec![1.0, -1.0]);
}

#[test]
fn forward_matches_hand_rolled_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = Mlp::new(&[3, 5, 2], &mut rng);
    let x = [0.3, -1.2, 2.0];
    let l0 = &net.layers()[0];
    let l1 = &net.layers()[1];
    let mut hidden = [0.0; 5];
    for (i, h) in hidden.iter_mut().enumerate() {
        let mut s = l0.bias[i];
        for (j, xj) in x.iter().enumerate() {
            s += l0.weights[[i, j]] * xj;
        }
        *h = s.max(0.0);
    }
    let mut want = [0.0; 2];
    for (i, w) in want.iter_mut().enumerate() {
        *w = l1.bias[i];
        for (j, hj) in hidden.iter().enumerate() {
            *w += l1.weights[[i, j]] * hj;
        }
    }
    let got = net.forward(&x);
    for (g, w) in got.iter().zip(want) {
        approx::assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
    }
}

#[test]
fn linear_weight_gradient_is_input_times_upstream() {
    let net = Mlp::from_layers(vec![Dense {
        weights: array![[0.7]],
        bias: array![0.0],
    }])
    .unwrap();
    let (tape, _) = net.backward(&[2.5], &[-3.0]);
    assert_eq!(tape.layers[0].weights[[0, 0]], -7.5);
    assert_eq!(tape.layers[0].bias[0], -3.0);
}

#[test]
fn zero_upstream_gives_zero_tape() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let net = Mlp::new(&[2, 4, 1], &mut rng);
    let (tape, dx) = net.backward(&[0.5, 0.5], &[0.0]);
    assert!(tape.is_zero());
    assert_eq!(dx, vec![0.0, 0.0]);
}

#[test]
fn sgd_step_arithmetic() {
    let make = || {
        Mlp::from_layers(vec![Dense {
            weights: array![[1.0]],
            bias: array![0.0],
        }])
        .unwrap()
    };
    let mut net = make();
    let mut tape = net.zero_tape();
    tape.layers[0].weights[[0, 0]] = 1.0;
    sgd_step(&mut net, &tape, 0.1, 0.0);
    approx::assert_abs_diff_eq!(net.layers()[0].weights[[0, 0]], 0.9, epsilon = 1e-15);

    let mut net = make();
    sgd_step(&mut net, &tape, 0.1, 0.1);
    approx::assert_abs_diff_eq!(net.layers()[0].weights[[0, 0]], 0.89, epsilon = 1e-15);

    let mut net = make();
    let zero = net.zero_tape();
    sgd_step(&mut net, &zero, 0.1, 0.0);
    assert_eq!(net, make());
}

#[test]
fn single_rectifier_layer_is_positively_homogeneous() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut net = Mlp::new(&[3, 6, 1], &mut rng);
    for layer in net.layers_mut() {
        layer.bias.fill(0.0);
    }
    let x = [0.4, -0.9, 1.3];
    let y = net.forward(&x)[0];
    for s in [0.5, 2.0, 7.0] {
        let xs: Vec<f64> = x.iter().map(|v| v * s).collect();
        approx::assert_relative_eq!(net.forward(&xs)[0], s * y, max_relative = 1e-12);
    }
}
