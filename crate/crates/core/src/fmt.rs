//! Deterministic number formatting for tables and JSON-like text.

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let e = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = e.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim(mant.to_string()), exp)
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds to 12 significant digits, for JSON output.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.11e}", x).parse().unwrap_or(x)
}

/// Rounds every number in a JSON value to 12 significant digits.
pub fn round_json(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round12(x)))
            {
                *n = x;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(sig12(4.0), "4");
        assert_eq!(sig12(0.1), "0.1");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(-2.5e-7), "-2.5e-7");
        assert_eq!(sig12(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig12(0.0), "0");
    }

    #[test]
    fn json_rounding() {
        let mut v = serde_json::json!({"a": [0.1 + 0.2, 3], "b": {"c": 1.0 / 3.0}});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[0.3,3],"b":{"c":0.333333333333}}"#);
    }
}
