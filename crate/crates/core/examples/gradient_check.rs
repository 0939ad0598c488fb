//! Compare the three gradient estimators on a random 3x3 instance: the
//! verbatim loss-level π/2 shift, the chain rule with an exact shift on φ,
//! and central finite differences.
//!
//! ```bash
//! cargo run --release -p qns-core --example gradient_check
//! ```

use qns::experiments::generate_dataset;
use qns::lattice::LatticeSpec;
use qns::qnn::{gradient_fd, gradient_shift, prepare_all, GradientMode, Qnn, QnnParams, SamplePipeline};
use qns::seed::rng_from_seed;

fn main() -> qns::Result<()> {
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let data = generate_dataset(&lattice, 2, 1.0, 50.0, 200.0, 5)?;
    let states = prepare_all(&lattice, &data)?;
    let labels: Vec<_> = data.iter().map(|s| s.label).collect();
    let weights: Vec<f64> = labels.iter().map(|l| if l.y() == 1.0 { 3.0 } else { 1.0 }).collect();
    let qnn = Qnn::new(&lattice, 200.0)?;
    let pipe = SamplePipeline::new(&qnn, &states, &labels, &weights)?;
    let params = QnnParams::random(9, 1, lattice.readout_index(), &mut rng_from_seed(3))?;

    let paper = gradient_shift(&pipe, &params, GradientMode::PaperShift, 1e-5)?;
    let chain = gradient_shift(&pipe, &params, GradientMode::ChainShift, 1e-5)?;
    let fd = gradient_fd(&pipe, &params, 1e-5)?;

    println!("{:>4} {:>5} {:>12} {:>12} {:>12}", "j", "kind", "paper", "chain", "fd");
    for j in 0..params.dim() {
        let kind = if params.is_phi(j) { "phi" } else { "theta" };
        println!("{j:4} {kind:>5} {:12.3e} {:12.3e} {:12.3e}", paper[j], chain[j], fd[j]);
    }
    let agree = paper
        .iter()
        .zip(&chain)
        .filter(|(a, b)| a.signum() == b.signum())
        .count();
    let worst = chain.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("sign agreement paper/chain: {agree}/{}", params.dim());
    println!("max |chain - fd|: {worst:.2e}");
    Ok(())
}
