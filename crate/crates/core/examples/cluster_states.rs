//! Graph states: stabilizer-exact correlators against dense state vectors,
//! for a path and the chained four-site windows.
use ursell::experiments::{cluster_report, ClusterParams, GraphSource, PatternSource};

fn main() -> ursell::Result<()> {
    let path = cluster_report(&ClusterParams { graph: GraphSource::Path, n: 6, ..Default::default() })?;
    println!("{path:#?}");
    for n in [4, 7, 10, 13, 16] {
        let p = ClusterParams { graph: GraphSource::Windows, n, pattern: Some(PatternSource::Windows), ..Default::default() };
        let r = cluster_report(&p)?;
        println!("n={n:2}  u_stab={}  u_dense={:?}  t_prep={:.4}", r.u_stabilizer, r.u_dense, r.preparation_time);
    }
    Ok(())
}
