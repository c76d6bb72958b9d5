//! CSV and binary formats for sampled fields and Laurent series.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64 as C64;
use std::io::{Read, Write};
use std::path::Path;

use super::grid::{DiskGrid, GridSpec};
use crate::bers::laurent::{LaurentSeries, SeriesForm};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TLF1";

/// Which node set the samples belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSet {
    Disk = 0,
    Exterior = 1,
}

pub fn write_samples_csv(path: &Path, points: &[C64], values: &[C64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["re_z", "im_z", "re_value", "im_value"])?;
    for (z, v) in points.iter().zip(values) {
        w.serialize((z.re, z.im, v.re, v.im))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_csv(path: &Path) -> Result<(Vec<C64>, Vec<C64>)> {
    let mut r = csv::Reader::from_path(path)?;
    let mut pts = Vec::new();
    let mut vals = Vec::new();
    for rec in r.deserialize() {
        let (a, b, c, d): (f64, f64, f64, f64) = rec?;
        pts.push(C64::new(a, b));
        vals.push(C64::new(c, d));
    }
    Ok((pts, vals))
}

/// Header then one `(re z, im z, re v, im v)` record per node, all little-endian.
pub fn write_binary(
    out: &mut impl Write,
    grid: &DiskGrid,
    nodes: NodeSet,
    values: &[C64],
) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::Validation("sample count does not match grid".into()));
    }
    out.write_all(MAGIC)?;
    out.write_u32::<LittleEndian>(grid.k)?;
    out.write_u32::<LittleEndian>(grid.angles as u32)?;
    out.write_u32::<LittleEndian>(grid.inner_rings as u32)?;
    out.write_u32::<LittleEndian>(grid.per_octave as u32)?;
    out.write_u8(nodes as u8)?;
    out.write_u64::<LittleEndian>(values.len() as u64)?;
    for (i, v) in values.iter().enumerate() {
        let z = match nodes {
            NodeSet::Disk => grid.node_at(i),
            NodeSet::Exterior => grid.exterior_node_at(i),
        };
        for x in [z.re, z.im, v.re, v.im] {
            out.write_f64::<LittleEndian>(x)?;
        }
    }
    Ok(())
}

pub fn read_binary(input: &mut impl Read) -> Result<(DiskGrid, NodeSet, Vec<C64>)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Validation("not a field dump".into()));
    }
    let spec = GridSpec {
        k: input.read_u32::<LittleEndian>()?,
        angles: input.read_u32::<LittleEndian>()? as usize,
        inner_rings: input.read_u32::<LittleEndian>()? as usize,
        per_octave: input.read_u32::<LittleEndian>()? as usize,
    };
    let nodes = match input.read_u8()? {
        0 => NodeSet::Disk,
        1 => NodeSet::Exterior,
        t => return Err(Error::Validation(format!("unknown node set {t}"))),
    };
    let n = input.read_u64::<LittleEndian>()? as usize;
    let grid = spec.build()?;
    if n != grid.len() {
        return Err(Error::Validation(
            "record count does not match header".into(),
        ));
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let _re = input.read_f64::<LittleEndian>()?;
        let _im = input.read_f64::<LittleEndian>()?;
        let a = input.read_f64::<LittleEndian>()?;
        let b = input.read_f64::<LittleEndian>()?;
        values.push(C64::new(a, b));
    }
    Ok((grid, nodes, values))
}

pub fn write_laurent_csv(path: &Path, series: &LaurentSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "re_c", "im_c"])?;
    for (k, c) in series.coeffs.iter().enumerate() {
        w.serialize((k, c.re, c.im))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_laurent_csv(path: &Path, form: SeriesForm) -> Result<LaurentSeries> {
    let mut r = csv::Reader::from_path(path)?;
    let mut coeffs = Vec::new();
    for rec in r.deserialize() {
        let (k, a, b): (usize, f64, f64) = rec?;
        if k >= coeffs.len() {
            coeffs.resize(k + 1, C64::new(0.0, 0.0));
        }
        coeffs[k] = C64::new(a, b);
    }
    Ok(LaurentSeries { form, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = GridSpec::default()
            .with_angles(16)
            .with_cutoff(4)
            .build()
            .unwrap();
        let vals: Vec<C64> = (0..g.len())
            .map(|i| C64::new(i as f64 * 0.5, -1.0))
            .collect();
        let mut buf = Vec::new();
        write_binary(&mut buf, &g, NodeSet::Exterior, &vals).unwrap();
        let (g2, ns, v2) = read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(g2, g);
        assert_eq!(ns, NodeSet::Exterior);
        assert_eq!(v2, vals);
        assert!(read_binary(&mut &b"XXXX"[..]).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let pts = vec![C64::new(0.1, 0.2), C64::new(-0.3, 0.4)];
        let vals = vec![C64::new(1.0, -1.0), C64::new(0.25, 0.5)];
        write_samples_csv(&p, &pts, &vals).unwrap();
        assert_eq!(read_samples_csv(&p).unwrap(), (pts, vals));
        let q = dir.path().join("l.csv");
        let s = LaurentSeries::map(vec![C64::new(0.0, 0.0), C64::new(0.2, 0.1)]);
        write_laurent_csv(&q, &s).unwrap();
        assert_eq!(read_laurent_csv(&q, SeriesForm::Map).unwrap(), s);
    }
}
