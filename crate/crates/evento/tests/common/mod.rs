#![allow(dead_code)]

use std::path::PathBuf;

use evento::model::{fit, FitConfig, Model};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap()
}

/// n1 = 1, n2 = 3, default split (11 of 16 rows).
pub fn config() -> FitConfig {
    FitConfig::with_indicators(1, 3)
}

pub fn model(name: &str, config: &FitConfig) -> Model {
    Model::from_artifact(fit(&fixture(name), config).unwrap()).unwrap()
}

pub const MARKET_SHA256: &str = "f7d0ce6d36fd579ab2d78939ec0d5000c0de370c8026b14db4505c629e4557c9";
pub const CONSTANT_SHA256: &str = "eb280b7bfee67e770f7769464c43459b0d3a1d66e54b20174ecdd698c7f6da57";
