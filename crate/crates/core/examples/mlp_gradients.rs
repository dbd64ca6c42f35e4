//! Backpropagation through a small ReLU network, checked against central
//! differences on the input.

use certnav::nn::Mlp;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let net = Mlp::new(&[3, 16, 16, 1], &mut rng);
    let x = [0.4, -1.1, 0.7];
    let (tape, dx) = net.backward(&x, &[1.0]);
    println!("output {:.6}, {} parameters", net.forward(&x)[0], net.num_parameters());
    println!("parameter gradient norm {:.6}", tape.flatten().iter().map(|g| g * g).sum::<f64>().sqrt());

    let eps = 1e-6;
    for j in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[j] += eps;
        xm[j] -= eps;
        let fd = (net.forward(&xp)[0] - net.forward(&xm)[0]) / (2.0 * eps);
        println!("d/dx{j}: analytic {:+.8}  numeric {:+.8}", dx[j], fd);
    }
}
