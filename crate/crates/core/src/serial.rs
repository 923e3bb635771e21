//! Number formatting shared by the JSON and CSV writers.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Pretty JSON formatter that writes every float with 17 significant
/// digits in exponent form, so a canonical document round-trips exactly.
struct CanonicalFormatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for CanonicalFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

/// Serialises `value` with sorted keys and 17-significant-digit reals.
pub fn canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // Going through `Value` sorts object keys (BTreeMap-backed map).
    let tree = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut out,
        CanonicalFormatter(PrettyFormatter::with_indent(b"  ")),
    );
    tree.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes utf-8"))
}

/// Fixed-point decimal rendering with `sig` significant digits.
pub fn decimal_sig(value: f64, sig: usize) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return format!("{:.*}", sig.saturating_sub(1), 0.0);
    }
    // Round first so values like 9.9999999999996 pick the right exponent.
    let sci = format!("{:.*e}", sig.saturating_sub(1), value);
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    format!("{value:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_sig_counts_significant_digits() {
        assert_eq!(decimal_sig(0.5, 12), "0.500000000000");
        assert_eq!(decimal_sig(123.456, 5), "123.46");
        assert_eq!(decimal_sig(0.0, 3), "0.00");
        assert_eq!(decimal_sig(-0.00123456, 3), "-0.00123");
        assert_eq!(decimal_sig(99999.7, 3), "100000");
        assert_eq!(decimal_sig(1.0, 12), "1.00000000000");
    }

    #[test]
    fn canonical_json_sorts_keys_and_keeps_bits() {
        let v = serde_json::json!({"b": 0.1, "a": [1.0, 2.5e-300], "n": 3});
        let s = canonical_json(&v).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("1.0000000000000001e-1"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64().unwrap(), 0.1);
        assert_eq!(back["a"][1].as_f64().unwrap(), 2.5e-300);
        assert_eq!(back["n"].as_u64().unwrap(), 3);
    }
}
