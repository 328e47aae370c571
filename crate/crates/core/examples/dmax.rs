//! Maximum transmission distance of 16-QAM under excess noise.
//! Takes about a minute per search.

use cvqkd::kgr_optimizer::{find_d_max, Evaluator, Modulation, Numerics, Objective};
use cvqkd::ChannelParams;

fn main() -> cvqkd::Result<()> {
    let eps: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(0.05), |s| s.parse())
        .expect("epsilon");
    let template = ChannelParams::from_distance(1.0, 0.2, eps)?;
    let ev = Evaluator::new(Numerics::default());
    for obj in [Objective::Uniform, Objective::MutualInfo] {
        let r = find_d_max(Modulation::Qam(4), &template, 0.95, obj, &ev)?;
        let name = obj.to_string();
        match r.d_max {
            Some(d) => println!("{name:<14} eps = {eps}: d_max = {d:.1} km (bracket {:?})", r.bracket),
            None if r.unbounded => println!("{name:<14} eps = {eps}: rate positive up to {:?} km", r.bracket.0),
            None => println!("{name:<14} eps = {eps}: no positive rate"),
        }
    }
    Ok(())
}
