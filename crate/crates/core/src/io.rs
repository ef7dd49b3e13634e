//! File formats: `GSEP1` grid dumps, key=value configs and model files, CSV.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FreqGrid, GridImage, Spectrum};
use crate::models::{LineModel, PointModel, PointSource, Scene};

const MAGIC: &[u8; 4] = b"GSEP";
const VERSION: u32 = 1;

/// Contents of a `GSEP1` file.
#[derive(Debug, Clone)]
pub enum GridData {
    Real(GridImage<f64>),
    Complex(Spectrum<f64>),
}

impl GridData {
    pub fn size(&self) -> usize {
        match self {
            GridData::Real(g) => g.size(),
            GridData::Complex(s) => s.size(),
        }
    }
}

fn header(flag: u32, n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&flag.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out
}

pub fn encode_real(img: &GridImage<f64>) -> Vec<u8> {
    let mut out = header(0, img.size());
    for v in img.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_complex(spec: &Spectrum<f64>) -> Vec<u8> {
    let mut out = header(1, spec.size());
    for z in spec.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<GridData> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing GSEP magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    if word(4) != VERSION {
        return Err(Error::Format(format!("unsupported version {}", word(4))));
    }
    let flag = word(8);
    let n = word(12) as usize;
    let grid = FreqGrid::new(n)?;
    let per = match flag {
        0 => 1,
        1 => 2,
        f => return Err(Error::Format(format!("unknown flag {f}"))),
    };
    let expect = 16 + 8 * per * n * n;
    if bytes.len() != expect {
        return Err(Error::Format(format!("payload is {} bytes, expected {expect}", bytes.len())));
    }
    let vals: Vec<f64> = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if flag == 0 {
        Ok(GridData::Real(GridImage::from_vec(&grid, vals)?))
    } else {
        let z = vals.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Ok(GridData::Complex(Spectrum::from_vec(&grid, z)?))
    }
}

pub fn write_real(path: impl AsRef<Path>, img: &GridImage<f64>) -> Result<()> {
    fs::write(path, encode_real(img))?;
    Ok(())
}

pub fn write_complex(path: impl AsRef<Path>, spec: &Spectrum<f64>) -> Result<()> {
    fs::write(path, encode_complex(spec))?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<GridData> {
    decode(&fs::read(path)?)
}

/// Reads a real grid; complex files are rejected.
pub fn read_real(path: impl AsRef<Path>) -> Result<GridImage<f64>> {
    match read_grid(path)? {
        GridData::Real(g) => Ok(g),
        GridData::Complex(_) => Err(Error::Format("expected a real grid".into())),
    }
}

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Repeated keys keep the last value.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", no + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_floats(s: &str, want: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Model(format!("{what} '{s}': {e}")))?;
    if v.len() != want {
        return Err(Error::Model(format!("{what} '{s}': expected {want} numbers")));
    }
    Ok(v)
}

/// Model file. `points` is a `;`-separated list of `x1,x2,lambda,c`,
/// `line` is `rho,offset` or `none`. Missing keys take the defaults.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let kv = parse_key_values(text)?;
    for k in kv.keys() {
        if k != "points" && k != "line" {
            return Err(Error::Model(format!("unknown model key '{k}'")));
        }
    }
    let defaults = Scene::default();
    let points = match kv.get("points").map(String::as_str) {
        None => defaults.points,
        Some("") | Some("none") => PointModel::new(vec![])?,
        Some(list) => {
            let pts = list
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    let v = parse_floats(s, 4, "point")?;
                    Ok(PointSource { x: (v[0], v[1]), lambda: v[2], c: v[3] })
                })
                .collect::<Result<Vec<_>>>()?;
            PointModel::new(pts)?
        }
    };
    let line = match kv.get("line").map(String::as_str) {
        None => defaults.line,
        Some("") | Some("none") => None,
        Some(s) => {
            let v = parse_floats(s, 2, "line")?;
            Some(LineModel::new(v[0], v[1])?)
        }
    };
    let scene = Scene { points, line };
    scene.validate()?;
    Ok(scene)
}

/// Inverse of [`parse_scene`].
pub fn format_scene(scene: &Scene) -> String {
    let pts: Vec<String> = scene
        .points
        .points
        .iter()
        .map(|p| format!("{},{},{},{}", p.x.0, p.x.1, p.lambda, p.c))
        .collect();
    let pts = if pts.is_empty() { "none".to_string() } else { pts.join("; ") };
    let line = match &scene.line {
        Some(l) => format!("{},{}", l.rho, l.offset),
        None => "none".into(),
    };
    format!("points = {pts}\nline = {line}\n")
}

/// Numeric CSV field; infinities use the `inf` sentinel.
pub fn csv_number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.12e}")
    }
}

pub fn write_csv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    fs::File::create(path)?.write_all(&bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip() {
        let g = FreqGrid::new(16).unwrap();
        let img = GridImage::from_fn(&g, |x, y| x * 3.0 - y);
        match decode(&encode_real(&img)).unwrap() {
            GridData::Real(back) => assert_eq!(back.values(), img.values()),
            _ => panic!("wrong kind"),
        }
        let spec = crate::grid::forward_ft(&img);
        match decode(&encode_complex(&spec)).unwrap() {
            GridData::Complex(back) => assert_eq!(back.values(), spec.values()),
            _ => panic!("wrong kind"),
        }
        let mut bad = encode_real(&img);
        bad.pop();
        assert!(decode(&bad).is_err());
        assert!(decode(b"NOPE").is_err());
    }

    #[test]
    fn key_values() {
        let kv = parse_key_values("# header\ngrid = 256\nalpha=1.5 # trailing\n\n").unwrap();
        assert_eq!(kv["grid"], "256");
        assert_eq!(kv["alpha"], "1.5");
        assert!(parse_key_values("oops").is_err());
    }

    #[test]
    fn scene_files() {
        let s = parse_scene("points = 0.25,0.25,1.5,1; 0.5,0.75,1.2,2\nline = 0.2,0.4\n").unwrap();
        assert_eq!(s.points.points.len(), 2);
        assert_eq!(s.line.unwrap().rho, 0.2);
        assert_eq!(parse_scene(&format_scene(&s)).unwrap(), s);
        let only = parse_scene("line = none").unwrap();
        assert!(only.line.is_none() && only.points.points.len() == 1);
        assert!(parse_scene("points = none\nline = none").is_err());
        assert!(parse_scene("points = 0,0,2.5,1").is_err());
        assert!(parse_scene("colour = red").is_err());
    }

    #[test]
    fn csv_sentinel() {
        assert_eq!(csv_number(f64::INFINITY), "inf");
        assert_eq!(csv_number(0.5), "5.000000000000e-1");
    }
}
