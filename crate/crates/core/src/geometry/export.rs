//! CSV and JSON output with floats held to 12 significant digits.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use super::SampleCloud;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .unwrap_or(v)
}

/// Rounds every float in a JSON tree in place. Integers are left alone.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(num) if !num.is_i64() && !num.is_u64() => {
            if let Some(f) = num.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                    *num = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes with rounded floats and pretty layout.
pub fn to_json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    serde_json::to_string_pretty(&v)
}

pub fn csv_header(n: usize) -> String {
    let mut h = String::from("n,t,margin");
    for prefix in ["x", "y"] {
        for i in 1..=n {
            let _ = write!(h, ",{prefix}{i}");
        }
    }
    h.push_str(",cyl");
    h
}

/// One row per point; `cyl` is empty when the cylinder sign is undefined.
pub fn cloud_csv(cloud: &SampleCloud) -> String {
    let mut out = csv_header(cloud.n);
    out.push('\n');
    for p in &cloud.points {
        let _ = write!(out, "{},{},{}", cloud.n, round_sig(p.t), round_sig(p.influence_margin));
        for v in p.x.iter().chain(&p.y) {
            let _ = write!(out, ",{}", round_sig(*v));
        }
        match p.cylinder_sign {
            Some(s) => {
                let _ = writeln!(out, ",{s}");
            }
            None => out.push_str(",\n"),
        }
    }
    out
}

pub fn cloud_json(cloud: &SampleCloud) -> serde_json::Result<String> {
    to_json_string(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_gst, SamplerConfig};
    use crate::GstModel;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-123456.78901234567), -123456.789012);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn json_rounding_keeps_integers() {
        let mut v = serde_json::json!({"a": 1.0 / 3.0, "b": [7, 3.0f64.sqrt()], "c": "s"});
        round_json(&mut v);
        assert_eq!(v["a"], serde_json::json!(0.333333333333));
        assert_eq!(v["b"][0], serde_json::json!(7));
        assert_eq!(v["b"][1], serde_json::json!(1.73205080757));
    }

    #[test]
    fn csv_layout() {
        assert_eq!(csv_header(2), "n,t,margin,x1,x2,y1,y2,cyl");
        let m = GstModel::new(4).unwrap();
        let cloud = sample_gst(&m.spectrum, 5, 1, &SamplerConfig::default()).unwrap();
        let csv = cloud_csv(&cloud);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        for row in &lines[1..] {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields.len(), 3 + 8 + 1);
            assert!(fields[11] == "1" || fields[11] == "-1");
        }
        let m5 = GstModel::new(5).unwrap();
        let c5 = sample_gst(&m5.spectrum, 2, 1, &SamplerConfig::default()).unwrap();
        assert!(cloud_csv(&c5).lines().nth(1).unwrap().ends_with(','));
    }
}
