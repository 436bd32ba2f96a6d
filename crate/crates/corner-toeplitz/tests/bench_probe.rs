use std::time::Instant;

use corner_toeplitz::geometry::{BoundaryCase, RegionKind, RegionSpec, Slope};
use corner_toeplitz::invariants::{corner_signature, SignatureOptions};
use corner_toeplitz::models::{quadrupole_2d, QuadrupoleFrame, QuadrupoleParams};

fn quadrant(kind: RegionKind) -> RegionSpec {
    RegionSpec::new(Slope::integer(0), Slope::PosInfinity, kind, BoundaryCase::Case1).unwrap()
}

#[test]
#[ignore]
fn time_edge_certificate() {
    let edge = corner_toeplitz::edge::EdgeOptions::sweep_internal();
    for (gx, gy) in [(0.5, 0.5), (1.9, 0.3)] {
        let model =
            quadrupole_2d(&QuadrupoleParams::axes(gx, gy), QuadrupoleFrame::Tensor).unwrap();
        for kind in [RegionKind::Convex, RegionKind::Concave] {
            let t0 = Instant::now();
            let gap = corner_toeplitz::invariants::certified_region_gap(
                &model.symbol,
                &quadrant(kind),
                &edge,
                1e-6,
            );
            eprintln!(
                "edge g=({gx},{gy}) {kind:?}: {:?} in {:.2}s",
                gap.map(|g| (g * 1e4).round() / 1e4),
                t0.elapsed().as_secs_f64()
            );
        }
    }
}

#[test]
#[ignore]
fn time_one_sweep_point() {
    let mut opts = SignatureOptions::default();
    opts.l = 24;
    opts.dl = 8;
    opts.edge = corner_toeplitz::edge::EdgeOptions::sweep_internal();
    for (gx, gy) in [(0.5, 0.5), (1.9, 0.3), (0.9, 0.9)] {
        let model =
            quadrupole_2d(&QuadrupoleParams::axes(gx, gy), QuadrupoleFrame::Tensor).unwrap();
        for kind in [RegionKind::Convex, RegionKind::Concave] {
            let t0 = Instant::now();
            let out = corner_signature(&model.symbol, &model.chiral, &quadrant(kind), &opts);
            let dt = t0.elapsed().as_secs_f64();
            match out {
                Ok(r) => eprintln!(
                    "g=({gx},{gy}) {kind:?}: value {} converged {} in {dt:.2}s",
                    r.value, r.diagnostics.converged
                ),
                Err(e) => eprintln!("g=({gx},{gy}) {kind:?}: ERR {e} in {dt:.2}s"),
            }
        }
    }
}
