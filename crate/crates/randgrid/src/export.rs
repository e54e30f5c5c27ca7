//! CSV writers for path-valued objects.
//!
//! Fixed dialect everywhere: comma separator, `.` decimal point, header row,
//! LF line endings. Floats use the shortest round-trip representation, so
//! files are byte-stable across runs and platforms.

use crate::euler::ErrorSample;
use crate::grid::RandomGrid;
use crate::limit::LimitSample;
use crate::path::{BrownianPath, StatePath};

/// `t, Y_1..Y_d, B_1..B_d` per mesh point.
pub fn state_path_csv(y: &StatePath, b: &BrownianPath) -> String {
    let d = y.dims;
    let mut header = String::from("t");
    for c in 0..d {
        header.push_str(&format!(",Y_{}", c + 1));
    }
    for c in 0..b.dims {
        header.push_str(&format!(",B_{}", c + 1));
    }
    let mut out = header;
    out.push('\n');
    for i in 0..=y.mesh.steps() {
        out.push_str(&y.mesh.time(i).to_string());
        for c in 0..d {
            out.push(',');
            out.push_str(&y.coord(i, c).to_string());
        }
        for c in 0..b.dims {
            out.push(',');
            out.push_str(&b.coord(i, c).to_string());
        }
        out.push('\n');
    }
    out
}

/// `k, tau_k, snapped_index` per grid point.
pub fn grid_csv(grid: &RandomGrid) -> String {
    let mut out = String::from("k,tau_k,snapped_index\n");
    for (k, (&tau, &snap)) in grid.taus.iter().zip(&grid.snap_indices).enumerate() {
        out.push_str(&format!("{k},{tau},{snap}\n"));
    }
    out
}

/// `t, U, Z_11..Z_dd` per mesh point (Z columns only when computed).
pub fn error_sample_csv(err: &ErrorSample, y: &StatePath) -> String {
    let d = err.dims;
    let mut header = String::from("t,U");
    if err.z.is_some() {
        for r in 0..d {
            for c in 0..d {
                header.push_str(&format!(",Z_{}{}", r + 1, c + 1));
            }
        }
    }
    let mut out = header;
    out.push('\n');
    for i in 0..=y.mesh.steps() {
        out.push_str(&y.mesh.time(i).to_string());
        out.push(',');
        out.push_str(&err.u[i].to_string());
        if err.z.is_some() {
            for r in 0..d {
                for c in 0..d {
                    out.push(',');
                    out.push_str(&err.z_entry(i, r, c).to_string());
                }
            }
        }
        out.push('\n');
    }
    out
}

/// `t, U_star` per mesh point.
pub fn limit_sample_csv(sample: &LimitSample, mesh: &crate::mesh::TimeMesh) -> String {
    let mut out = String::from("t,U_star\n");
    for i in 0..=mesh.steps() {
        out.push_str(&format!("{},{}\n", mesh.time(i), sample.u[i]));
    }
    out
}
