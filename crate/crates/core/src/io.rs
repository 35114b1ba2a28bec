//! Snapshot and time-series file formats.
//!
//! Floats are always written with 17 significant digits, which round-trips
//! every f64 exactly: write -> read -> write produces identical bytes.
//! Snapshots list the canonical mode half only, in lexicographic order.

use std::sync::Arc;

use num_complex::Complex64;
use serde_json::Value;
use thiserror::Error;

use crate::lattice::{LatticeError, TruncationSet, TruncationShape, WaveVector};
use crate::state::{Spectrum2D, Spectrum3D, StateError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("snapshot schema violation: {0}")]
    Schema(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// 17-significant-digit scientific notation; lossless for f64.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn shape_name(shape: TruncationShape) -> &'static str {
    match shape {
        TruncationShape::Disk => "disk",
        TruncationShape::Square => "square",
    }
}

fn shape_from_name(name: &str) -> Result<TruncationShape, IoError> {
    match name {
        "disk" => Ok(TruncationShape::Disk),
        "square" => Ok(TruncationShape::Square),
        other => Err(IoError::Schema(format!("unknown shape {other:?}"))),
    }
}

fn write_mode_line<const D: usize>(out: &mut String, k: WaveVector<D>, re: &[f64], im: &[f64]) {
    out.push_str("{\"k\":[");
    for (i, c) in k.components().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&c.to_string());
    }
    out.push_str("],\"re\":[");
    for (i, v) in re.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&f17(*v));
    }
    out.push_str("],\"im\":[");
    for (i, v) in im.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&f17(*v));
    }
    out.push_str("]}");
}

fn snapshot_header(out: &mut String, dimension: usize, shape: TruncationShape, k_max: f64) {
    out.push_str("{\n\"dimension\": ");
    out.push_str(&dimension.to_string());
    out.push_str(",\n\"shape\": \"");
    out.push_str(shape_name(shape));
    out.push_str("\",\n\"k_max\": ");
    out.push_str(&f17(k_max));
    out.push_str(",\n\"modes\": [\n");
}

pub fn spectrum_to_json_2d(s: &Spectrum2D) -> String {
    let mut out = String::new();
    snapshot_header(&mut out, 2, s.trunc().shape(), s.trunc().k_max());
    for (i, (&k, a)) in s
        .trunc()
        .canonical_modes()
        .iter()
        .zip(s.amps())
        .enumerate()
    {
        if i > 0 {
            out.push_str(",\n");
        }
        write_mode_line(&mut out, k, &[a.re], &[a.im]);
    }
    out.push_str("\n]\n}\n");
    out
}

pub fn spectrum_to_json_3d(s: &Spectrum3D) -> String {
    let mut out = String::new();
    snapshot_header(&mut out, 3, s.trunc().shape(), s.trunc().k_max());
    for (i, (&k, a)) in s
        .trunc()
        .canonical_modes()
        .iter()
        .zip(s.amps())
        .enumerate()
    {
        if i > 0 {
            out.push_str(",\n");
        }
        let re = [a[0].re, a[1].re, a[2].re];
        let im = [a[0].im, a[1].im, a[2].im];
        write_mode_line(&mut out, k, &re, &im);
    }
    out.push_str("\n]\n}\n");
    out
}

struct SnapshotParts {
    shape: TruncationShape,
    k_max: f64,
    modes: Vec<(Vec<i64>, Vec<f64>, Vec<f64>)>,
}

fn parse_snapshot(text: &str, dimension: usize) -> Result<SnapshotParts, IoError> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc
        .as_object()
        .ok_or_else(|| IoError::Schema("top level must be an object".into()))?;
    let dim = obj
        .get("dimension")
        .and_then(Value::as_u64)
        .ok_or_else(|| IoError::Schema("missing dimension".into()))?;
    if dim as usize != dimension {
        return Err(IoError::Schema(format!(
            "expected dimension {dimension}, found {dim}"
        )));
    }
    let shape = shape_from_name(
        obj.get("shape")
            .and_then(Value::as_str)
            .ok_or_else(|| IoError::Schema("missing shape".into()))?,
    )?;
    let k_max = obj
        .get("k_max")
        .and_then(Value::as_f64)
        .ok_or_else(|| IoError::Schema("missing k_max".into()))?;
    let modes_val = obj
        .get("modes")
        .and_then(Value::as_array)
        .ok_or_else(|| IoError::Schema("missing modes array".into()))?;
    let mut modes = Vec::with_capacity(modes_val.len());
    for entry in modes_val {
        let m = entry
            .as_object()
            .ok_or_else(|| IoError::Schema("mode entries must be objects".into()))?;
        let ints = |key: &str| -> Result<Vec<i64>, IoError> {
            m.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| IoError::Schema(format!("missing {key}")))?
                .iter()
                .map(|v| {
                    v.as_i64()
                        .ok_or_else(|| IoError::Schema(format!("non-integer in {key}")))
                })
                .collect()
        };
        let floats = |key: &str| -> Result<Vec<f64>, IoError> {
            m.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| IoError::Schema(format!("missing {key}")))?
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| IoError::Schema(format!("non-number in {key}")))
                })
                .collect()
        };
        let k = ints("k")?;
        if k.len() != dimension {
            return Err(IoError::Schema("wrong wave-vector arity".into()));
        }
        let re = floats("re")?;
        let im = floats("im")?;
        let want = if dimension == 2 { 1 } else { 3 };
        if re.len() != want || im.len() != want {
            return Err(IoError::Schema("wrong amplitude arity".into()));
        }
        modes.push((k, re, im));
    }
    Ok(SnapshotParts {
        shape,
        k_max,
        modes,
    })
}

pub fn spectrum_from_json_2d(text: &str) -> Result<Spectrum2D, IoError> {
    let parts = parse_snapshot(text, 2)?;
    let trunc = Arc::new(TruncationSet::<2>::build(parts.shape, parts.k_max)?);
    let mut s = Spectrum2D::zeros(trunc);
    for (k, re, im) in parts.modes {
        let k = WaveVector::new([k[0], k[1]]);
        s.set_amp(k, Complex64::new(re[0], im[0]))?;
    }
    Ok(s)
}

pub fn spectrum_from_json_3d(text: &str) -> Result<Spectrum3D, IoError> {
    let parts = parse_snapshot(text, 3)?;
    let trunc = Arc::new(TruncationSet::<3>::build(parts.shape, parts.k_max)?);
    let mut s = Spectrum3D::zeros(trunc);
    for (k, re, im) in parts.modes {
        let k = WaveVector::new([k[0], k[1], k[2]]);
        s.set_amp(
            k,
            [
                Complex64::new(re[0], im[0]),
                Complex64::new(re[1], im[1]),
                Complex64::new(re[2], im[2]),
            ],
        )?;
    }
    Ok(s)
}

/// One observation row of the scenario time series.
#[derive(Clone, Debug)]
pub struct SeriesRow {
    pub t: f64,
    pub enstrophy: f64,
    pub energy: f64,
    pub envelope_ratio: f64,
    /// Components of the worst mode, empty when no mode qualifies.
    pub worst_k: Vec<i64>,
    pub fitted_gamma: f64,
    pub dt: f64,
    pub step_rejections: u64,
}

pub const SERIES_HEADER: &str =
    "t,enstrophy,energy,envelope_ratio_re_im_max,envelope_worst_k,fitted_gamma,dt,step_rejections";

pub fn series_to_csv(rows: &[SeriesRow]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&f17(row.t));
        out.push(',');
        out.push_str(&f17(row.enstrophy));
        out.push(',');
        out.push_str(&f17(row.energy));
        out.push(',');
        out.push_str(&f17(row.envelope_ratio));
        out.push(',');
        let ks: Vec<String> = row.worst_k.iter().map(|c| c.to_string()).collect();
        out.push_str(&ks.join(";"));
        out.push(',');
        out.push_str(&f17(row.fitted_gamma));
        out.push(',');
        out.push_str(&f17(row.dt));
        out.push(',');
        out.push_str(&row.step_rejections.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn f17_round_trips_awkward_values() {
        for &x in &[
            0.1,
            -3.0,
            std::f64::consts::PI,
            1e-300,
            2.2250738585072014e-308,
            123456789.123456789,
        ] {
            let parsed: f64 = f17(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn snapshot_round_trip_is_byte_identical() {
        let trunc = Arc::new(TruncationSet::<2>::disk(3.0).unwrap());
        let mut s = Spectrum2D::zeros(Arc::clone(&trunc));
        let mut x = 0.123f64;
        for slot in 0..trunc.canonical_modes().len() {
            x = (x * 97.3).fract();
            s.amps_mut()[slot] = Complex64::new(x - 0.5, (x * 1.7).fract() - 0.5);
        }
        let first = spectrum_to_json_2d(&s);
        let read = spectrum_from_json_2d(&first).unwrap();
        let second = spectrum_to_json_2d(&read);
        assert_eq!(first, second);
    }

    #[test]
    fn snapshot_round_trip_3d() {
        let trunc = Arc::new(TruncationSet::<3>::disk(2.0).unwrap());
        let mut s = Spectrum3D::zeros(Arc::clone(&trunc));
        let mut x = 0.31f64;
        for slot in 0..trunc.canonical_modes().len() {
            let mut v = [Complex64::new(0.0, 0.0); 3];
            for c in v.iter_mut() {
                x = (x * 37.7).fract();
                *c = Complex64::new(x - 0.5, (x * 3.3).fract() - 0.5);
            }
            s.amps_mut()[slot] = v;
        }
        let first = spectrum_to_json_3d(&s);
        let read = spectrum_from_json_3d(&first).unwrap();
        let second = spectrum_to_json_3d(&read);
        assert_eq!(first, second);
    }

    #[test]
    fn snapshot_rejects_wrong_dimension() {
        let trunc = Arc::new(TruncationSet::<2>::disk(1.0).unwrap());
        let s = Spectrum2D::zeros(trunc);
        let text = spectrum_to_json_2d(&s);
        assert!(matches!(
            spectrum_from_json_3d(&text),
            Err(IoError::Schema(_))
        ));
    }

    #[test]
    fn series_csv_has_fixed_schema() {
        let rows = vec![SeriesRow {
            t: 0.5,
            enstrophy: 1.25,
            energy: 0.5,
            envelope_ratio: 0.75,
            worst_k: vec![1, -2],
            fitted_gamma: f64::NAN,
            dt: 0.005,
            step_rejections: 0,
        }];
        let text = series_to_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SERIES_HEADER);
        let row = lines.next().unwrap();
        assert!(row.contains("1;-2"));
        assert!(row.contains("NaN"));
        assert_eq!(row.split(',').count(), 8);
    }

    proptest! {
        #[test]
        fn f17_round_trips_random_floats(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let parsed: f64 = f17(x).parse().unwrap();
            prop_assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }
}
