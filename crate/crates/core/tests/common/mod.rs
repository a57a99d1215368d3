#![allow(dead_code)]

use std::path::{Path, PathBuf};

use phi_bvp::config::{load_config, ProblemConfig};
use phi_bvp::DiscretePath;

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> ProblemConfig {
    load_config(&fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn sup_error(x: &DiscretePath, exact: impl Fn(f64) -> f64) -> f64 {
    x.mesh().nodes().iter().zip(x.nodes()).map(|(&t, &v)| (v - exact(t)).abs()).fold(0.0, f64::max)
}
