//! Writes a seeded COMPAS-shaped CSV: `synthetic_cohort <rows> <seed> <path>`.

use std::fs::File;

use gapfair::dataset::write_records;
use gapfair::synthetic::compas_like;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let rows: usize = args.next().unwrap_or_else(|| "3000".into()).parse()?;
    let seed: u64 = args.next().unwrap_or_else(|| "0".into()).parse()?;
    let path = args.next().unwrap_or_else(|| "synthetic_compas.csv".into());
    write_records(&compas_like(rows, seed), File::create(&path)?)?;
    eprintln!("wrote {rows} rows to {path}");
    Ok(())
}
