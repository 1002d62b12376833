//! Shared fixtures for the benchmarks.

use weakcontact::gallery::ellipsoid;
use weakcontact::{sample_points, SamplePlan, WeakStructure};

/// The `a = 2` ellipsoid structure with `count` sample points.
pub fn ellipsoid_fixture(count: usize) -> (WeakStructure, Vec<Vec<f64>>) {
    let entry = ellipsoid(2.0).expect("valid parameter");
    let points = sample_points(&entry.chart, &SamplePlan { count, ..Default::default() }).expect("non-empty domain");
    (entry.structure().expect("ellipsoid field is unit Killing"), points)
}
