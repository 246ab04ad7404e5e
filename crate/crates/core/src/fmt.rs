//! Numeric output with 17 significant digits.

use std::io;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::value::RawValue;

/// `x` in scientific notation with 17 significant digits; `inf`, `-inf`, `nan`
/// for non-finite values.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// An `f64` that serializes as a 17-significant-digit JSON number (or a string
/// for non-finite values).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sig17(pub f64);

impl From<f64> for Sig17 {
    fn from(x: f64) -> Self {
        Sig17(x)
    }
}

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_str(&sig17(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Sig17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Sig17;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Sig17, E> {
                Ok(Sig17(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Sig17, E> {
                Ok(Sig17(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Sig17, E> {
                Ok(Sig17(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Sig17, E> {
                match v {
                    "inf" => Ok(Sig17(f64::INFINITY)),
                    "-inf" => Ok(Sig17(f64::NEG_INFINITY)),
                    "nan" => Ok(Sig17(f64::NAN)),
                    other => Err(E::custom(format!("bad number `{other}`"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Pretty JSON whose floating-point numbers carry 17 significant digits.
struct Sig17Formatter<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(sig17(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty-printed JSON with every float in 17-significant-digit form, plus a
/// trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(1.0), "1.0000000000000000e0");
        assert_eq!(sig17(0.1), "1.0000000000000001e-1");
        assert_eq!(sig17(f64::INFINITY), "inf");
        let x = 2f64.sqrt();
        assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn formatter_covers_plain_floats() {
        let v = serde_json::json!({ "a": 0.5, "n": 3, "xs": [Sig17(2.0), Sig17(f64::NAN)] });
        let text = to_json(&v).unwrap();
        assert!(text.contains("\"a\": 5.0000000000000000e-1"), "{text}");
        assert!(text.contains("\"n\": 3"));
        assert!(text.contains("2.0000000000000000e0"));
        assert!(text.contains("\"nan\""));
        assert!(text.ends_with("}\n"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"], 0.5);
    }

    #[test]
    fn json_roundtrip() {
        let v = vec![Sig17(1.5), Sig17(f64::INFINITY), Sig17(-0.25)];
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, "[1.5000000000000000e0,\"inf\",-2.5000000000000000e-1]");
        let back: Vec<Sig17> = serde_json::from_str(&text).unwrap();
        assert_eq!(back[0], v[0]);
        assert_eq!(back[2], v[2]);
        assert!(back[1].0.is_infinite());
    }
}
