//! Key-rate ingredients with excess noise: Eve's state comes from an
//! entangling cloner and is conditioned on Bob's homodyne outcome.

use cvqkd::classical_info::{mutual_information, GridPolicy};
use cvqkd::holevo::{holevo_thermal, HolevoOptions};
use cvqkd::{build_qam, ChannelParams};

fn main() -> cvqkd::Result<()> {
    let c = build_qam(4, 1.0, 0.5)?;
    let opts = HolevoOptions::default();
    println!(
        "{:>6} {:>8} {:>12} {:>12} {:>12}",
        "d_km", "eps", "I_AB", "chi_BE", "0.95 I - chi"
    );
    for eps in [0.005, 0.01, 0.03] {
        for d in [20.0, 60.0] {
            let ch = ChannelParams::from_distance(d, 0.2, eps)?;
            let i = mutual_information(&c, &ch, &GridPolicy::default())?.i_ab;
            let chi = holevo_thermal(&c, &ch, &opts)?.chi;
            println!("{d:>6} {eps:>8} {i:>12.6} {chi:>12.6} {:>12.6}", 0.95 * i - chi);
        }
    }
    Ok(())
}
