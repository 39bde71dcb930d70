//! Samples undirected and directed Erdos-Renyi graphs and writes them to disk.
//!
//! cargo run --example sample_graphs

use robust_er::graph::{
    read_graph_file, sample_directed_er, sample_er, write_graph_file, GraphFile, GraphFormat, GraphParams, NodeSet,
};
use robust_er::rng::RandomStream;

fn main() -> robust_er::Result<()> {
    let mut rng = RandomStream::from_seed(42);
    let params = GraphParams::new(500, 0.1);
    let g = sample_er(&params, &mut rng)?;
    let all = NodeSet::full(g.n());
    println!("G(500, 0.1): {} edges, p_S over all nodes = {:.5}", g.edge_count(), g.empirical_density(&all)?);

    let degrees = g.degrees();
    let (lo, hi) = (degrees.iter().min().unwrap(), degrees.iter().max().unwrap());
    println!("degree range [{lo}, {hi}], expected {:.1}", 0.1 * 499.0);

    let dg = sample_directed_er(&GraphParams::new(200, 0.3), &mut rng)?;
    println!("DG(200, 0.3): {} arcs", dg.edge_count());

    let dir = std::env::temp_dir().join("rer-sample-graphs");
    std::fs::create_dir_all(&dir)?;
    for (name, format) in [("g.txt", GraphFormat::Text), ("g.bin", GraphFormat::Binary)] {
        let path = dir.join(name);
        write_graph_file(&GraphFile::Undirected(g.clone()), &path, format)?;
        let back = read_graph_file(&path)?;
        println!("{}: {} bytes, round trip ok = {}", path.display(), std::fs::metadata(&path)?.len(), back == GraphFile::Undirected(g.clone()));
    }
    Ok(())
}
