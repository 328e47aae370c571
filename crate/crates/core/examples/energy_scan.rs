//! K against mean photon number at 50 km, and the optimum per shaping rule.

use cvqkd::kgr_optimizer::{optimize_energy, Evaluator, Modulation, Numerics, Objective};
use cvqkd::ChannelParams;

fn main() -> cvqkd::Result<()> {
    let ch = ChannelParams::pure_loss(50.0)?;
    let ev = Evaluator::new(Numerics::default());
    let m = Modulation::Qam(4);
    println!("{:>6} {:>12} {:>12} {:>6}", "nbar", "K uniform", "K shaped", "nu");
    for nbar in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let u = ev.best_at_energy(m, Objective::Uniform, &ch, nbar, 0.95)?;
        let s = ev.best_at_energy(m, Objective::MutualInfo, &ch, nbar, 0.95)?;
        println!("{nbar:>6} {:>12.4e} {:>12.4e} {:>6.3}", u.k, s.k, s.nu);
    }
    for obj in [Objective::Uniform, Objective::MutualInfo, Objective::Kgr] {
        let r = optimize_energy(m, &ch, 0.95, obj, &ev)?;
        println!(
            "{:<14} K_max = {:.6e} at nbar = {:.4}, nu = {:.4}",
            obj.to_string(),
            r.k_max,
            r.nbar_max,
            r.nu_opt
        );
    }
    Ok(())
}
