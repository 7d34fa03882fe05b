//! Run directories and CSV/JSON writers. Floats are written with 17
//! significant digits so every value round-trips exactly.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use flatbeam_core::elliptic2d::Field2D;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::error::CliResult;

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty printer whose only change is the float format.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn json_string(value: &Value) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    serde::Serialize::serialize(value, &mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// `<outdir>/<command>/<run>`; `run` defaults to a UTC timestamp.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(outdir: &Path, command: &str, run: Option<&str>) -> CliResult<Self> {
        let base = outdir.join(command);
        let path = match run {
            Some(name) => base.join(name),
            None => {
                let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
                let mut p = base.join(&stamp);
                let mut k = 1;
                while p.exists() {
                    p = base.join(format!("{stamp}-{k}"));
                    k += 1;
                }
                p
            }
        };
        fs::create_dir_all(&path)?;
        Ok(RunDir { path })
    }

    pub fn text(&self, name: &str, body: &str) -> CliResult<()> {
        fs::write(self.path.join(name), body)?;
        Ok(())
    }

    pub fn json(&self, name: &str, value: &Value) -> CliResult<()> {
        self.text(name, &json_string(value)?)
    }

    pub fn csv<I>(&self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_path(self.path.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `i, j, x, y, u` for every node.
    pub fn field(&self, name: &str, field: &Field2D) -> CliResult<()> {
        let g = field.grid;
        let rows = (0..=g.nx).flat_map(|i| {
            (0..=g.ny).map(move |j| {
                vec![i.to_string(), j.to_string(), fmt_f64(g.x(i)), fmt_f64(g.y(j)), fmt_f64(field.at(i, j))]
            })
        });
        self.csv(name, &["i", "j", "x", "y", "u"], rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 16.0 / 9.0, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn json_uses_seventeen_digits_and_parses_back() {
        let s = json_string(&json!({"x": 0.1, "n": 3, "bad": f64::NAN})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
        assert_eq!(back["n"].as_u64(), Some(3));
        assert!(back["bad"].is_null());
    }
}
