//! CSV and manifest output.
//!
//! Every float is written with 17 significant digits so files round-trip
//! exactly and two identical runs give byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::diagnostics::ErrorMap;
use crate::integrator::Trajectory;
use crate::Result;

pub const TRAJECTORY_HEADER: &str = "t,re_x,im_x,re_y,im_y,re_z,im_z";
pub const ERROR_MAP_HEADER: &str = "p,T,err_x,err_y,err_z,status,accepted_steps,rejected_steps";

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// Trajectory CSV body for the given sampled states (three components).
pub fn trajectory_csv<'a>(times: &[f64], states: impl Iterator<Item = &'a [Complex64]>) -> String {
    let mut out = String::with_capacity(times.len() * 160);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (t, s) in times.iter().zip(states) {
        out.push_str(&fmt_float(*t));
        for z in s {
            let _ = write!(out, ",{},{}", fmt_float(z.re), fmt_float(z.im));
        }
        out.push('\n');
    }
    out
}

/// Writes `<stem>_V.csv` (modulated) and `<stem>_U.csv` (physical, via
/// `back`) for a trajectory.
pub fn write_trajectory_pair<B>(dir: &Path, stem: &str, traj: &Trajectory, back: B) -> Result<()>
where
    B: Fn(f64, &[Complex64]) -> Vec<Complex64>,
{
    fs::write(
        dir.join(format!("{stem}_V.csv")),
        trajectory_csv(&traj.times, traj.states()),
    )?;
    let physical: Vec<Vec<Complex64>> = traj.times.iter().zip(traj.states()).map(|(&t, v)| back(t, v)).collect();
    fs::write(
        dir.join(format!("{stem}_U.csv")),
        trajectory_csv(&traj.times, physical.iter().map(Vec::as_slice)),
    )?;
    Ok(())
}

pub fn error_map_csv(map: &ErrorMap) -> String {
    let mut out = String::new();
    out.push_str(ERROR_MAP_HEADER);
    out.push('\n');
    for cell in &map.cells {
        let err = |j: usize| fmt_float(cell.errors.get(j).copied().unwrap_or(f64::NAN));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cell.p,
            fmt_float(cell.window),
            err(0),
            err(1),
            err(2),
            cell.status.token(),
            cell.accepted_steps,
            cell.rejected_steps
        );
    }
    out
}

pub fn write_error_map(path: &Path, map: &ErrorMap) -> Result<()> {
    fs::write(path, error_map_csv(map))?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_manifest<T: Serialize>(path: &Path, manifest: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| crate::Error::InvalidConfig(format!("cannot serialize manifest: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
