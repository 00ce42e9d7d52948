//! Regenerates the bundled dataset in `data/`.
//!
//! cargo run --release --example make_data [OUT_DIR]

use prodmap::synthetic::{curve_pair, sphere_pair};

fn main() -> prodmap::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data").to_string());
    std::fs::create_dir_all(&out).map_err(|e| prodmap::Error::io(&out, e))?;
    let (m, n, gt) = curve_pair(200)?;
    prodmap::io::write_atomic(format!("{out}/curve_m.poly"), m.to_polyline().as_bytes())?;
    prodmap::io::write_atomic(format!("{out}/curve_n.poly"), n.to_polyline().as_bytes())?;
    gt.save(format!("{out}/curve_gt.map"))?;
    let (m, n, gt) = sphere_pair(7)?;
    prodmap::io::write_atomic(format!("{out}/sphere_m.off"), m.to_off().as_bytes())?;
    prodmap::io::write_atomic(format!("{out}/sphere_n.off"), n.to_off().as_bytes())?;
    gt.save(format!("{out}/sphere_gt.map"))?;
    println!("wrote dataset to {out}");
    Ok(())
}
