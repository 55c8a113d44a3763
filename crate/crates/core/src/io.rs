//! Binary, JSON and CSV dumps of sampled functions and operator matrices.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LwError, Result};
use crate::grid::{Axis, GridSpec, SampledFunction, C64};
use crate::weyl::OperatorMatrix;

/// JSON sidecar of a binary array dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpMeta {
    pub dim: usize,
    pub half_extent: Vec<f64>,
    pub points: Vec<usize>,
    pub hbar: f64,
    /// Free-form provenance of the data: symbol, conventions, variants.
    #[serde(default)]
    pub tags: std::collections::BTreeMap<String, String>,
}

impl DumpMeta {
    pub fn for_grid(grid: &GridSpec) -> Self {
        DumpMeta {
            dim: grid.dim(),
            half_extent: grid.axes().iter().map(|a| a.half_extent).collect(),
            points: grid.shape(),
            hbar: grid.hbar(),
            tags: Default::default(),
        }
    }

    pub fn with_tag(mut self, key: &str, value: impl Into<String>) -> Self {
        self.tags.insert(key.to_string(), value.into());
        self
    }

    pub fn grid(&self) -> Result<GridSpec> {
        if self.half_extent.len() != self.dim || self.points.len() != self.dim {
            return Err(LwError::InvalidGrid("sidecar axis lists do not match dim".into()));
        }
        let axes = self
            .half_extent
            .iter()
            .zip(&self.points)
            .map(|(&l, &n)| Axis::new(l, n))
            .collect::<Result<Vec<_>>>()?;
        GridSpec::from_axes(axes, self.hbar)
    }
}

/// The sidecar path: `<path>.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_complex_le(path: &Path, values: impl Iterator<Item = C64>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Writes the samples as little-endian (re, im) f64 pairs in row-major order plus a
/// JSON sidecar.
pub fn write_binary(f: &SampledFunction, path: &Path, meta: &DumpMeta) -> Result<()> {
    write_complex_le(path, f.values().iter().copied())?;
    write_json(&sidecar_path(path), meta)
}

pub fn read_binary(path: &Path) -> Result<(SampledFunction, DumpMeta)> {
    let meta: DumpMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let grid = meta.grid()?;
    let bytes = fs::read(path)?;
    if bytes.len() != grid.len() * 16 {
        return Err(LwError::InvalidGrid(format!("{} bytes for {} nodes", bytes.len(), grid.len())));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8-byte chunk"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8-byte chunk"));
            C64::new(re, im)
        })
        .collect();
    Ok((SampledFunction::new(grid, values)?, meta))
}

/// Matrix dump: row-major complex128 plus a sidecar carrying the grid, descriptor and
/// normalization tag.
pub fn write_matrix(op: &OperatorMatrix, path: &Path, normalization: &str) -> Result<()> {
    let m = op.entries();
    let (r, c) = m.shape();
    write_complex_le(path, (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])))?;
    let meta = DumpMeta::for_grid(op.grid())
        .with_tag("symbol", op.descriptor())
        .with_tag("normalization", normalization)
        .with_tag("quadrature_weight", format!("{:e}", op.quadrature_weight()));
    write_json(&sidecar_path(path), &meta)
}

/// CSV with one row per node: coordinates then re, im.
pub fn write_csv(f: &SampledFunction, path: &Path) -> Result<()> {
    let grid = f.grid();
    let mut w = BufWriter::new(fs::File::create(path)?);
    let names = ["x", "y", "x2", "y2"];
    let header: Vec<&str> = names.iter().take(grid.dim()).copied().collect();
    writeln!(w, "{},re,im", header.join(","))?;
    for (idx, v) in f.values().iter().enumerate() {
        let node: Vec<String> = grid.node(idx).iter().map(|c| format!("{c:.12e}")).collect();
        writeln!(w, "{},{:.16e},{:.16e}", node.join(","), v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}

/// The 1-D line of a 2-D function with `axis` held at node `index`.
pub fn slice_2d(f: &SampledFunction, axis: usize, index: usize) -> Result<SampledFunction> {
    let grid = f.grid();
    grid.ensure_dim(2)?;
    if axis > 1 || index >= grid.axis(axis).points {
        return Err(LwError::InvalidParameter(format!("slice axis {axis} index {index}")));
    }
    let (n1, n2) = (grid.axis(0).points, grid.axis(1).points);
    let free = 1 - axis;
    let line = GridSpec::from_axes(vec![*grid.axis(free)], grid.hbar())?;
    let values = if axis == 0 {
        f.values()[index * n2..(index + 1) * n2].to_vec()
    } else {
        (0..n1).map(|i| f.values()[i * n2 + index]).collect()
    };
    SampledFunction::new(line, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn binary_round_trip_and_slice() {
        let dir = std::env::temp_dir().join(format!("lwkit-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let g = make_grid(2, 4.0, 8, 0.5).unwrap();
        let f = SampledFunction::from_fn(&g, |z| C64::new(z[0], -z[1] * 0.25));
        let path = dir.join("f.bin");
        write_binary(&f, &path, &DumpMeta::for_grid(&g).with_tag("kind", "test")).unwrap();
        let (back, meta) = read_binary(&path).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(meta.tags["kind"], "test");
        assert_eq!(fs::metadata(&path).unwrap().len(), 8 * 8 * 16);

        let s = slice_2d(&f, 1, 4).unwrap();
        assert_eq!(s.values()[3], C64::new(g.axis(0).coord(3), 0.0));
        write_csv(&s, &dir.join("s.csv")).unwrap();
        let text = fs::read_to_string(dir.join("s.csv")).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("x,re,im"));
        fs::remove_dir_all(&dir).ok();
    }
}
