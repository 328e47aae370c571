//! Maxwell-Boltzmann shaping of a 16-QAM constellation at fixed mean energy.

use cvqkd::build_qam;

fn main() -> cvqkd::Result<()> {
    let nbar = 1.0;
    println!("{:>6} {:>10} {:>10}   per-axis weights", "nu", "delta", "beta");
    for nu in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let c = build_qam(4, nbar, nu)?;
        let s = c.shaping().expect("QAM carries shaping data");
        let w: Vec<String> = s.weights.iter().map(|w| format!("{w:.4}")).collect();
        println!("{:>6.2} {:>10.5} {:>10.4}   [{}]", nu, s.delta, s.beta, w.join(", "));
        assert!((c.mean_energy() - nbar).abs() < 1e-10);
    }
    Ok(())
}
