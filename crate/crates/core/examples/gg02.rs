//! Gaussian-modulation reference: closed forms against the Gaussian-state
//! route.

use cvqkd::fock_space::thermal_entropy;
use cvqkd::gaussian_engine::{condition_on_homodyne_q, evolve, GaussianState, SymplecticMap};
use cvqkd::kgr_optimizer::gg02_kgr;
use cvqkd::ChannelParams;

fn main() -> cvqkd::Result<()> {
    let nbar = 2.0;
    for d in [10.0, 50.0, 100.0] {
        let ch = ChannelParams::pure_loss(d)?;
        let p = gg02_kgr(nbar, &ch, 0.95)?;

        // Alice's TMSV half A', signal A mixed with Eve's vacuum E.
        let v = 1.0 + 2.0 * nbar;
        let s = GaussianState::tmsv(v)?.tensor(&GaussianState::vacuum(1));
        let s = evolve(&s, &SymplecticMap::beam_splitter(ch.eta(), 3, 1, 2)?)?;
        let eve = s.reduce(&[2])?;
        let (eve_b, _) = condition_on_homodyne_q(&s.reduce(&[1, 2])?, 0, 0.0)?;
        let entropy = |st: &GaussianState| -> cvqkd::Result<f64> {
            Ok(st
                .symplectic_eigenvalues()?
                .iter()
                .map(|nu| thermal_entropy((nu - 1.0) / 2.0))
                .sum())
        };
        let chi = entropy(&eve)? - entropy(&eve_b)?;
        println!(
            "d = {d:>5}  I = {:.6}  chi = {:.6} (state route {:.6})  K = {:.6}",
            p.i_ab, p.chi_be, chi, p.k
        );
    }
    Ok(())
}
