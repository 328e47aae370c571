//! Eve's Holevo information for uniform and shaped 16-QAM on a pure-loss
//! fiber, with both entropy back ends.

use cvqkd::holevo::{holevo_pure_loss, EntropyMethod, HolevoOptions};
use cvqkd::{build_qam, ChannelParams};

fn main() -> cvqkd::Result<()> {
    let ch = ChannelParams::pure_loss(20.0)?;
    let gram = HolevoOptions::default();
    let fock = HolevoOptions {
        method: EntropyMethod::Fock,
        ..Default::default()
    };
    for nu in [0.0, 1.0] {
        let c = build_qam(4, 1.0, nu)?;
        let a = holevo_pure_loss(&c, &ch, &gram)?;
        let b = holevo_pure_loss(&c, &ch, &fock)?;
        println!(
            "nu = {nu}: chi = {:.9} (gram)  {:.9} (fock, cutoff {})",
            a.chi, b.chi, b.cutoff_used
        );
    }
    Ok(())
}
