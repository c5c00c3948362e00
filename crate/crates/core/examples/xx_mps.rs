//! Bond-dimension-2 MPS for the XX chain and the boundary rule for Z strings.
use ursell::closed_form::{xx_disconnected_z, XXChainMps};
use ursell::quantum::{expectation, Hamiltonian, Observable, StateVector};

fn main() -> ursell::Result<()> {
    let (n, t) = (6, 0.7);
    let mps = XXChainMps::new(t);
    let (left, right, unitary) = mps.canonical_errors();
    println!("canonical errors: left {left:.1e}  right {right:.1e}  unitary {unitary:.1e}");

    let psi = Hamiltonian::xx_chain(n)?.evolve(&StateVector::basis(n, 0)?, t)?;
    let mut worst: f64 = 0.0;
    for idx in 0..1usize << n {
        let bits: Vec<u8> = (0..n).map(|i| (idx >> (n - 1 - i) & 1) as u8).collect();
        worst = worst.max((mps.amplitude(&bits)? - psi.amplitudes()[idx]).norm());
    }
    println!("max |mps - dense| over {} amplitudes: {worst:.2e}", 1 << n);

    for sites in [vec![0], vec![1, 2], vec![0, 2, 4], vec![0, 1, 2, 3, 4, 5]] {
        let obs: Vec<Observable> = sites.iter().map(|&s| Observable::z(s)).collect();
        let dense = expectation(&psi, &obs)?.re;
        println!("Z on {sites:?}: rule {:+.12}  dense {dense:+.12}", xx_disconnected_z(&sites, n, t)?);
    }
    Ok(())
}
