//! Deterministic number formatting and plain-text tables.

use std::io::{self, Write};

use serde::Serializer;

/// `x` with 17 significant digits in scientific notation, which round-trips
/// every `f64`. Non-finite values are spelled `nan`, `inf`, `-inf`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// Serde helper writing an `f64` as a JSON number with 17 significant
/// digits; non-finite values become strings.
pub fn serialize_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = serde_json::value::RawValue::from_string(fmt17(*x))
            .map_err(serde::ser::Error::custom)?;
        serde::Serialize::serialize(&raw, s)
    } else {
        s.serialize_str(&fmt17(*x))
    }
}

pub fn serialize_f64_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct F(f64);
    impl serde::Serialize for F {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize_f64(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&F(*x))?;
    }
    seq.end()
}

pub fn serialize_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_f64(v, s),
        None => s.serialize_none(),
    }
}

/// Writes `# header` followed by whitespace-separated rows.
pub fn write_table<W: Write, R: AsRef<[f64]>>(
    mut w: W,
    comments: &[String],
    columns: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "# {}", columns.join(" "))?;
    for row in rows {
        let line: Vec<String> = row.as_ref().iter().map(|x| fmt17(*x)).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}
