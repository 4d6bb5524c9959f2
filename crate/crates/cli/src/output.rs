//! Deterministic JSON: sorted keys, 12 significant digits.

use serde::Serialize;
use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats a finite float with [`SIGNIFICANT_DIGITS`] significant digits
/// and no trailing zeros.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..15).contains(&exp) {
        let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
        let body = if exp >= 0 {
            let int_len = exp as usize + 1;
            if int_len >= digits.len() {
                format!("{digits}{}", "0".repeat(int_len - digits.len()))
            } else {
                format!("{}.{}", &digits[..int_len], &digits[int_len..])
            }
        } else {
            format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
        };
        let sign = if x < 0.0 { "-" } else { "" };
        format!("{sign}{}", trim(body))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().expect("float")));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(&map[k], out);
            }
            out.push('}');
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1 + 0.2), "0.3");
        assert_eq!(format_float(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_float(-1234.5), "-1234.5");
        assert_eq!(format_float(1.0e-9), "1e-9");
        assert_eq!(format_float(6.02214076e23), "6.02214076e23");
        assert_eq!(format_float(123456789012345.0), "123456789012000");
    }

    #[test]
    fn keys_are_sorted() {
        let v = serde_json::json!({"b": 1, "a": [0.5, "x"], "c": {"z": null, "y": true}});
        assert_eq!(to_json(&v).unwrap(), r#"{"a":[0.5,"x"],"b":1,"c":{"y":true,"z":null}}"#);
    }
}
