//! Aperture files and prior records.
//!
//! An aperture file is a header line `n=<int> dims=<1|2> kind=<binary|continuous>`
//! followed by the values, whitespace separated (one grid row per line for 2D).
//! Continuous values are written with 17 significant digits so a round trip is
//! exact.
//!
//! A prior record is one line such as
//! `prior bandlimited theta=1 s=0.02 r=0.005`; a table prior names a file with
//! one density value per line: `prior table theta=1 table=d.txt`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{Aperture, ApertureKind, Dims, PriorKind, ScenePrior, DEFAULT_KNEE};

/// Serializes a mask in the aperture file format.
pub fn format_aperture(a: &Aperture) -> Result<String> {
    if a.kind == ApertureKind::Lens {
        return Err(Error::invalid("the ideal lens is not a mask and has no file form"));
    }
    let binary = a.is_binary();
    let (n, dims, row) = match a.dims {
        Dims::One => (a.values.len(), 1, a.values.len()),
        Dims::Two(n) => (n, 2, n),
    };
    let mut out = format!(
        "n={} dims={} kind={}\n",
        n,
        dims,
        if binary { "binary" } else { "continuous" }
    );
    for line in a.values.chunks(row) {
        let cells: Vec<String> = line
            .iter()
            .map(|&v| if binary { format!("{}", v as u8) } else { format!("{:.16e}", v) })
            .collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    Ok(out)
}

/// Parses the aperture file format.
pub fn parse_aperture(text: &str) -> Result<Aperture> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty aperture file".into()))?;
    let (mut n, mut dims, mut kind) = (None, None, None);
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field `{field}`")))?;
        match key {
            "n" => n = Some(parse_num::<usize>(key, value)?),
            "dims" => dims = Some(parse_num::<u8>(key, value)?),
            "kind" => kind = Some(value.to_string()),
            _ => return Err(Error::Parse(format!("unknown header field `{key}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::Parse("header lacks n".into()))?;
    let dims = dims.ok_or_else(|| Error::Parse("header lacks dims".into()))?;
    let kind = kind.ok_or_else(|| Error::Parse("header lacks kind".into()))?;
    if n == 0 {
        return Err(Error::Parse("n must be positive".into()));
    }
    let count = match dims {
        1 => n,
        2 => n * n,
        _ => return Err(Error::Parse(format!("dims must be 1 or 2, got {dims}"))),
    };
    let values: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|tok| parse_num::<f64>("value", tok))
        .collect::<Result<_>>()?;
    if values.len() != count {
        return Err(Error::Parse(format!("expected {count} values, found {}", values.len())));
    }
    match kind.as_str() {
        "binary" => {
            if values.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::Parse("binary file holds a value other than 0 or 1".into()));
            }
        }
        "continuous" => {}
        other => return Err(Error::Parse(format!("unknown kind `{other}`"))),
    }
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Parse("mask values must lie in [0, 1]".into()));
    }
    if dims == 1 {
        Aperture::mask(values)
    } else {
        Aperture::mask_2d(values, n)
    }
}

pub fn write_aperture(path: &Path, a: &Aperture) -> Result<()> {
    fs::write(path, format_aperture(a)?)?;
    Ok(())
}

pub fn read_aperture(path: &Path) -> Result<Aperture> {
    parse_aperture(&fs::read_to_string(path)?)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse(format!("bad value `{value}` for {key}")))
}

/// Parses a prior record. Relative table paths resolve against `base`.
pub fn parse_prior_record(line: &str, base: Option<&Path>) -> Result<ScenePrior> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("prior") {
        return Err(Error::Parse("prior record must start with `prior`".into()));
    }
    let kind = tokens.next().ok_or_else(|| Error::Parse("prior record lacks a kind".into()))?;
    let mut theta = None;
    let (mut s, mut r, mut exponent, mut knee, mut table) = (None, None, None, None, None);
    for field in tokens {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad prior field `{field}`")))?;
        match key {
            "theta" => theta = Some(parse_num::<f64>(key, value)?),
            "s" => s = Some(parse_num::<f64>(key, value)?),
            "r" => r = Some(parse_num::<f64>(key, value)?),
            "exponent" => exponent = Some(parse_num::<f64>(key, value)?),
            "x0" | "knee" => knee = Some(parse_num::<f64>(key, value)?),
            "table" => table = Some(value.to_string()),
            _ => return Err(Error::Parse(format!("unknown prior field `{key}`"))),
        }
    }
    let theta = theta.ok_or_else(|| Error::Parse("prior record lacks theta".into()))?;
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| Error::Parse(format!("{kind} prior needs {name}")))
    };
    let prior = match kind {
        "iid" => ScenePrior::iid(theta)?,
        "bandlimited" => ScenePrior::bandlimited(theta, need(s, "s")?, need(r, "r")?)?,
        "powerlaw" | "power-law" => ScenePrior::power_law(
            theta,
            need(exponent, "exponent")?,
            knee.unwrap_or(DEFAULT_KNEE),
        )?,
        "table" => {
            let name = table.ok_or_else(|| Error::Parse("table prior needs table=<path>".into()))?;
            let mut path = PathBuf::from(&name);
            if path.is_relative() {
                if let Some(b) = base {
                    path = b.join(path);
                }
            }
            let values = read_table(&path)?;
            let mut prior = ScenePrior::table(theta, values)?;
            if let PriorKind::Table { source, .. } = &mut prior.kind {
                *source = Some(name);
            }
            prior
        }
        other => return Err(Error::Parse(format!("unknown prior kind `{other}`"))),
    };
    Ok(prior)
}

/// One float per line; blank lines and `#` comments are skipped.
pub fn read_table(path: &Path) -> Result<Vec<f64>> {
    fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| parse_num::<f64>("table entry", l))
        .collect()
}

/// `--prior` argument: an inline record or a path to a file holding one.
pub fn load_prior(arg: &str) -> Result<ScenePrior> {
    let trimmed = arg.trim();
    if trimmed.starts_with("prior ") {
        return parse_prior_record(trimmed, None);
    }
    let path = Path::new(trimmed);
    let text = fs::read_to_string(path)?;
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| Error::Parse(format!("{} holds no prior record", path.display())))?;
    parse_prior_record(line, path.parent())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let a = Aperture::mask(vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        let text = format_aperture(&a).unwrap();
        assert_eq!(text, "n=4 dims=1 kind=binary\n1 0 1 1\n");
        assert_eq!(parse_aperture(&text).unwrap(), a);
    }

    #[test]
    fn continuous_round_trip_is_exact() {
        let v = vec![0.1, 1.0 / 3.0, 0.999_999_999_999_9, 0.0, 2f64.sqrt() / 2.0];
        let a = Aperture::mask(v).unwrap();
        assert_eq!(parse_aperture(&format_aperture(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn grid_round_trip() {
        let a = Aperture::mask_2d(vec![0.25, 0.5, 0.75, 1.0], 2).unwrap();
        let text = format_aperture(&a).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(parse_aperture(&text).unwrap(), a);
    }

    #[test]
    fn malformed_files() {
        assert!(parse_aperture("").is_err());
        assert!(parse_aperture("n=3 dims=1 kind=binary\n1 0\n").is_err());
        assert!(parse_aperture("n=2 dims=1 kind=binary\n1 0.5\n").is_err());
        assert!(parse_aperture("n=2 dims=3 kind=binary\n1 0\n").is_err());
        assert!(parse_aperture("n=2 dims=1 kind=continuous\n1 1.5\n").is_err());
        assert!(parse_aperture("n=2 dims=1 kind=fuzzy\n1 0\n").is_err());
        assert!(parse_aperture("n=2 dims=1\n1 0\n").is_err());
        assert!(format_aperture(&Aperture::lens(3)).is_err());
    }

    #[test]
    fn prior_records() {
        let p = parse_prior_record("prior bandlimited theta=1 s=0.02 r=0.005", None).unwrap();
        assert_eq!(p, ScenePrior::bandlimited(1.0, 0.02, 0.005).unwrap());
        assert_eq!(p.to_string(), "prior bandlimited theta=1 s=0.02 r=0.005");
        let q = parse_prior_record(&ScenePrior::iid(0.01).unwrap().to_string(), None).unwrap();
        assert!(q.is_iid());
        assert!(parse_prior_record("prior iid", None).is_err());
        assert!(parse_prior_record("prior bandlimited theta=1 s=0.02", None).is_err());
        assert!(parse_prior_record("prior magic theta=1", None).is_err());
        assert!(parse_prior_record("iid theta=1", None).is_err());
    }

    #[test]
    fn table_prior_from_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("d.txt"), "# density\n2\n1\n0.5\n").unwrap();
        fs::write(dir.path().join("p.txt"), "prior table theta=1 table=d.txt\n").unwrap();
        let p = load_prior(dir.path().join("p.txt").to_str().unwrap()).unwrap();
        match p.kind {
            PriorKind::Table { values, source } => {
                assert_eq!(values, vec![2.0, 1.0, 0.5]);
                assert_eq!(source.as_deref(), Some("d.txt"));
            }
            _ => panic!("expected a table prior"),
        }
    }
}
