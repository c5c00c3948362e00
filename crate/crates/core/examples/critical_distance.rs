//! Critical distance R over support bipartitions, on a line and on two clusters.
use ursell::geometry::{critical_distance, min_bipartition_distance, Geometry};

fn main() -> ursell::Result<()> {
    let line = Geometry::from_positions(vec![vec![0.0], vec![1.0], vec![3.0]])?;
    let supports = vec![vec![0], vec![1], vec![2]];
    let (r, cut) = critical_distance(&line, &supports)?;
    println!("line 0,1,3: R={r}  cut {:?}|{:?}  (min over cuts {})", cut.first, cut.second, min_bipartition_distance(&line, &supports)?);

    let mut pts: Vec<Vec<f64>> = (0..3).map(|i| vec![0.1 * i as f64, 0.0]).collect();
    pts.extend((0..3).map(|i| vec![10.0 + 0.1 * i as f64, 0.0]));
    let clusters = Geometry::from_positions(pts)?;
    let singles: Vec<Vec<usize>> = (0..6).map(|i| vec![i]).collect();
    let (r, cut) = critical_distance(&clusters, &singles)?;
    println!("two clusters: R={r:.3}  cut {:?}|{:?}", cut.first, cut.second);
    Ok(())
}
