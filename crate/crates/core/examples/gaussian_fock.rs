//! Gaussian states: beam splitter, homodyne conditioning, Williamson form,
//! and the Fock-basis density matrix of a displaced thermal state.

use cvqkd::fock_space::{thermal_entropy, von_neumann_entropy};
use cvqkd::gaussian_engine::{condition_on_homodyne_q, evolve, fock_expand_auto, GaussianState, SymplecticMap};

fn main() -> cvqkd::Result<()> {
    // Coherent state on mode 0, thermal noise on mode 1, mixed at η = 0.3.
    let input = GaussianState::coherent(1.2, -0.4).tensor(&GaussianState::thermal(0.5)?);
    let bs = SymplecticMap::beam_splitter(0.3, 2, 0, 1)?;
    let out = evolve(&input, &bs)?;
    println!("output means   {:?}", out.fm().as_slice());
    println!("symplectic nu  {:?}", out.symplectic_eigenvalues()?);

    let (cond, density) = condition_on_homodyne_q(&out, 0, 0.7)?;
    println!("p(x = 0.7)     {density:.6}");
    println!("mode 1 after   fm = {:?}", cond.fm().as_slice());

    let mode1 = cond.reduce(&[0])?;
    let rho = fock_expand_auto(&mode1, 40)?;
    let nu = mode1.symplectic_eigenvalues()?[0];
    println!(
        "cutoff {}  trace deficit {:.2e}",
        rho.dims()[0] - 1,
        rho.trace_deficit()
    );
    println!(
        "S(rho) = {:.9}  g((nu-1)/2) = {:.9}",
        von_neumann_entropy(&rho)?,
        thermal_entropy((nu - 1.0) / 2.0)
    );
    Ok(())
}
