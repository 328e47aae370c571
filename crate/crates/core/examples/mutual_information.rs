//! Homodyne mutual information of uniform QAM, PSK and Gaussian modulation
//! after a 50 km pure-loss fiber.

use cvqkd::classical_info::{gg02_mutual_information, mutual_information, GridPolicy};
use cvqkd::{build_psk, build_qam, ChannelParams};

fn main() -> cvqkd::Result<()> {
    let ch = ChannelParams::pure_loss(50.0)?;
    let grid = GridPolicy::default();
    println!("eta = {:.5}", ch.eta());
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "nbar", "QAM4", "QAM16", "PSK16", "Gaussian"
    );
    for nbar in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let q4 = mutual_information(&build_qam(2, nbar, 0.0)?, &ch, &grid)?.i_ab;
        let q16 = mutual_information(&build_qam(4, nbar, 0.0)?, &ch, &grid)?.i_ab;
        let p16 = mutual_information(&build_psk(16, nbar)?, &ch, &grid)?.i_ab;
        let g = gg02_mutual_information(nbar, &ch)?;
        println!("{nbar:>6.2} {q4:>10.6} {q16:>10.6} {p16:>10.6} {g:>10.6}");
    }
    Ok(())
}
