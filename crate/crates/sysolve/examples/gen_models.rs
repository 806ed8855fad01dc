//! Writes the canned model files: `cargo run --example gen_models [DIR]`.

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models"));
    std::fs::create_dir_all(&dir)?;
    for net in sysolve::zoo::all() {
        let path = dir.join(format!("{}.json", net.model_name));
        std::fs::write(&path, sysolve::files::network_to_json(&net))?;
        let macs = net.total_macs().expect("canned models are valid");
        println!("{:<22} {:>4} layers {:>15} MACs", net.model_name, net.layers.len(), macs);
    }
    Ok(())
}
