use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::highfid::{Concentration2D, Grid2D};
use crate::{Error, Result};

const MAGIC: &str = "opspec-snapshot 1";

/// Header fields stored with a 2D snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub grid: Grid2D,
    pub time: f64,
    pub seed: u64,
    pub config_hash: String,
}

/// Text header terminated by `end_header`, then `nx * ny` little-endian f64.
pub fn write_snapshot(path: &Path, field: &Concentration2D, seed: u64, config_hash: &str) -> Result<()> {
    let g = field.grid;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{MAGIC}")?;
    writeln!(f, "nx = {}", g.nx)?;
    writeln!(f, "ny = {}", g.ny)?;
    writeln!(f, "lx = {:.16e}", g.lx)?;
    writeln!(f, "ly = {:.16e}", g.ly)?;
    writeln!(f, "time = {:.16e}", field.time)?;
    writeln!(f, "seed = {seed}")?;
    writeln!(f, "config_hash = {config_hash}")?;
    writeln!(f, "layout = row-major i*ny+j, f64 little endian")?;
    writeln!(f, "end_header")?;
    for v in &field.values {
        f.write_all(&v.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, Concentration2D)> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim() != MAGIC {
        return Err(Error::Format(format!("{} is not a snapshot file", path.display())));
    }
    let mut kv = std::collections::HashMap::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Format("snapshot header is not terminated".into()));
        }
        let l = line.trim();
        if l == "end_header" {
            break;
        }
        if let Some((k, v)) = l.split_once('=') {
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let get = |k: &str| -> Result<&String> {
        kv.get(k)
            .ok_or_else(|| Error::Format(format!("snapshot header lacks `{k}`")))
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?
            .parse()
            .map_err(|_| Error::Format(format!("bad `{k}` in snapshot header")))
    };
    let grid = Grid2D::new(num("lx")?, num("ly")?, num("nx")? as usize, num("ny")? as usize)?;
    let header = SnapshotHeader {
        grid,
        time: num("time")?,
        seed: get("seed")?
            .parse()
            .map_err(|_| Error::Format("bad seed in snapshot header".into()))?,
        config_hash: get("config_hash")?.clone(),
    };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.n_cells() {
        return Err(Error::Format(format!(
            "snapshot body has {} bytes, expected {}",
            bytes.len(),
            8 * grid.n_cells()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let field = Concentration2D::new(grid, values, header.time)?;
    Ok((header, field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid2D::new(1.0, 0.5, 4, 3).unwrap();
        let values: Vec<f64> = (0..12).map(|i| (i as f64).sqrt() - 1.0).collect();
        let c = Concentration2D::new(g, values, 0.25).unwrap();
        let p = dir.path().join("s.bin");
        write_snapshot(&p, &c, 42, "deadbeef").unwrap();
        let (h, back) = read_snapshot(&p).unwrap();
        assert_eq!(back, c);
        assert_eq!(h.seed, 42);
        assert_eq!(h.config_hash, "deadbeef");
    }

    #[test]
    fn truncated_body_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid2D::new(1.0, 1.0, 2, 2).unwrap();
        let c = Concentration2D::new(g, vec![1.0; 4], 0.0).unwrap();
        let p = dir.path().join("s.bin");
        write_snapshot(&p, &c, 0, "x").unwrap();
        let mut bytes = std::fs::read(&p).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&p, bytes).unwrap();
        assert!(matches!(read_snapshot(&p), Err(Error::Format(_))));
    }
}
