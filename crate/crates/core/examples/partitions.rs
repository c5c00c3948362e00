//! Set partitions, bipartitions and the Möbius weights used by the cumulant sum.
use ursell::partitions::{bell_number, enumerate_bipartitions, enumerate_partitions, moebius_g, stirling2};

fn main() -> ursell::Result<()> {
    for p in enumerate_partitions(4)? {
        println!("{:?}  rgs={:?}", p.blocks(), p.rgs());
    }
    println!();
    for b in enumerate_bipartitions(4)? {
        println!("{:?} | {:?}", b.first, b.second);
    }
    println!();
    for n in 1..=12u32 {
        let by_blocks: u128 = (1..=n).map(|k| stirling2(n, k).unwrap()).sum();
        println!("n={n:2}  B_n={:>10}  sum S(n,k)={by_blocks:>10}  g(n)={}", bell_number(n)?, moebius_g(n)?);
    }
    Ok(())
}
