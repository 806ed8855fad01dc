use std::path::{Path, PathBuf};

use sysolve::files::{network_to_json, read_network};
use sysolve_core::{lower_network, LayerKind};

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

#[test]
fn committed_files_match_the_generator() {
    for net in sysolve::zoo::all() {
        let path = models_dir().join(format!("{}.json", net.model_name));
        let on_disk = std::fs::read_to_string(&path).unwrap();
        assert_eq!(on_disk, network_to_json(&net), "{} is stale", path.display());
    }
    let files = std::fs::read_dir(models_dir())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "json"))
        .count();
    assert_eq!(files, 9);
}

#[test]
fn every_layer_conserves_macs() {
    for net in sysolve::zoo::all() {
        let net = read_network(&models_dir().join(format!("{}.json", net.model_name))).unwrap();
        let workloads = lower_network(&net).unwrap();
        assert_eq!(workloads.len(), net.layers.len());
        for (layer, w) in net.layers.iter().zip(&workloads) {
            assert_eq!(w.macs(), layer.macs().unwrap(), "{}", layer.name);
            assert_eq!(w.source_layer, layer.name);
        }
    }
}

/// Bottleneck-by-bottleneck MAC count written out from the ResNet-152 table,
/// independent of the layer builders.
fn resnet152_oracle() -> (u64, u64) {
    let conv = |hw: u64, k: u64, c_in: u64, c_out: u64| hw * hw * k * k * c_in * c_out;
    let mut layers = 1;
    let mut macs = conv(112, 7, 3, 64);
    let stages: [(u64, u64, u64); 4] = [(3, 64, 56), (8, 128, 28), (36, 256, 14), (3, 512, 7)];
    let mut c_in = 64;
    for (blocks, mid, hw) in stages {
        for _ in 0..blocks {
            macs += conv(hw, 1, c_in, mid) + conv(hw, 3, mid, mid) + conv(hw, 1, mid, 4 * mid);
            layers += 3;
            if c_in != 4 * mid {
                macs += conv(hw, 1, c_in, 4 * mid);
                layers += 1;
            }
            c_in = 4 * mid;
        }
    }
    (layers + 1, macs + 2048 * 1000)
}

#[test]
fn resnet152_matches_the_independent_count() {
    let net = read_network(&models_dir().join("resnet152.json")).unwrap();
    let oracle = resnet152_oracle();
    assert_eq!(oracle, (156, 11_282_415_616));
    let lowered: u128 = lower_network(&net).unwrap().iter().map(|w| w.macs()).sum();
    assert_eq!((net.layers.len() as u64, lowered as u64), oracle);
}

#[test]
fn grouped_models_use_grouped_layers() {
    let depthwise = |name: &str| {
        let net = read_network(&models_dir().join(format!("{name}.json"))).unwrap();
        net.layers
            .iter()
            .filter(|l| l.kind == LayerKind::Conv2d && l.groups > 1)
            .map(|l| (l.groups == l.c_in && l.groups == l.c_out, l.groups))
            .collect::<Vec<_>>()
    };
    let mobilenet = depthwise("mobilenet_v3_large");
    assert_eq!(mobilenet.len(), 15);
    assert!(mobilenet.iter().all(|(dw, _)| *dw));
    assert_eq!(depthwise("efficientnet_b0").len(), 16);
    let resnext = depthwise("resnext152_32x4d");
    assert_eq!(resnext.len(), 50);
    assert!(resnext.iter().all(|&(dw, g)| !dw && g == 32));
}
