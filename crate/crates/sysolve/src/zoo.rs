//! Layer tables of the canned CNNs, 224x224 input, batch 1.
//!
//! Only convolutions and fully connected layers appear; pooling, activations,
//! normalization, additions and concatenations carry no GEMM work and are
//! tracked here only for their effect on spatial size and channel count.

use sysolve_core::{LayerKind, LayerSpec, NetworkSpec};

/// Activation tensor shape between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Shape {
    h: u32,
    w: u32,
    c: u32,
}

struct Net {
    layers: Vec<LayerSpec>,
}

fn out(input: u32, kernel: u32, stride: u32, pad: u32) -> u32 {
    (input + 2 * pad - kernel) / stride + 1
}

impl Net {
    fn new() -> Self {
        Net { layers: Vec::new() }
    }

    #[allow(clippy::too_many_arguments)]
    fn conv_rect(
        &mut self,
        name: impl Into<String>,
        x: Shape,
        c_out: u32,
        (kh, kw): (u32, u32),
        stride: u32,
        (ph, pw): (u32, u32),
        groups: u32,
    ) -> Shape {
        let layer = LayerSpec {
            name: name.into(),
            kind: LayerKind::Conv2d,
            input_h: x.h,
            input_w: x.w,
            c_in: x.c,
            c_out,
            kernel_h: kh,
            kernel_w: kw,
            stride_h: stride,
            stride_w: stride,
            dilation_h: 1,
            dilation_w: 1,
            pad_h: ph,
            pad_w: pw,
            groups,
        };
        self.layers.push(layer);
        Shape {
            h: out(x.h, kh, stride, ph),
            w: out(x.w, kw, stride, pw),
            c: c_out,
        }
    }

    fn conv(&mut self, name: impl Into<String>, x: Shape, c_out: u32, k: u32, stride: u32, pad: u32) -> Shape {
        self.conv_rect(name, x, c_out, (k, k), stride, (pad, pad), 1)
    }

    /// `k x k` with "same" padding.
    fn conv_same(&mut self, name: impl Into<String>, x: Shape, c_out: u32, k: u32, stride: u32, groups: u32) -> Shape {
        self.conv_rect(name, x, c_out, (k, k), stride, ((k - 1) / 2, (k - 1) / 2), groups)
    }

    fn fc(&mut self, name: impl Into<String>, c_in: u32, c_out: u32) -> u32 {
        self.layers.push(LayerSpec::fully_connected(name, c_in, c_out));
        c_out
    }

    fn finish(self, model_name: &str) -> NetworkSpec {
        NetworkSpec {
            model_name: model_name.to_string(),
            input_h: 224,
            input_w: 224,
            layers: self.layers,
        }
    }
}

fn pool(x: Shape, kernel: u32, stride: u32, pad: u32) -> Shape {
    Shape {
        h: out(x.h, kernel, stride, pad),
        w: out(x.w, kernel, stride, pad),
        ..x
    }
}

/// Pooling with ceil rounding, as in the Caffe-era Inception models.
fn pool_ceil(x: Shape, kernel: u32, stride: u32) -> Shape {
    let o = |v: u32| (v - kernel).div_ceil(stride) + 1;
    Shape {
        h: o(x.h),
        w: o(x.w),
        ..x
    }
}

const INPUT: Shape = Shape { h: 224, w: 224, c: 3 };

/// torchvision's single-tower AlexNet.
pub fn alexnet() -> NetworkSpec {
    let mut n = Net::new();
    let x = n.conv("features.0", INPUT, 64, 11, 4, 2);
    let x = pool(x, 3, 2, 0);
    let x = n.conv("features.3", x, 192, 5, 1, 2);
    let x = pool(x, 3, 2, 0);
    let x = n.conv("features.6", x, 384, 3, 1, 1);
    let x = n.conv("features.8", x, 256, 3, 1, 1);
    let x = n.conv("features.10", x, 256, 3, 1, 1);
    let x = pool(x, 3, 2, 0);
    let c = n.fc("classifier.1", x.c * x.h * x.w, 4096);
    let c = n.fc("classifier.4", c, 4096);
    n.fc("classifier.6", c, 1000);
    n.finish("alexnet")
}

pub fn vgg16() -> NetworkSpec {
    let mut n = Net::new();
    let mut x = INPUT;
    let mut index = 0;
    for (convs, c_out) in [(2, 64), (2, 128), (3, 256), (3, 512), (3, 512)] {
        for _ in 0..convs {
            x = n.conv(format!("features.{index}"), x, c_out, 3, 1, 1);
            index += 2;
        }
        x = pool(x, 2, 2, 0);
        index += 1;
    }
    let c = n.fc("classifier.0", x.c * x.h * x.w, 4096);
    let c = n.fc("classifier.3", c, 4096);
    n.fc("classifier.6", c, 1000);
    n.finish("vgg16")
}

/// GoogLeNet inception module: 1x1, 3x3 reduce, 3x3, 5x5 reduce, 5x5, pool projection.
fn inception_v1(n: &mut Net, name: &str, x: Shape, c: [u32; 6]) -> Shape {
    n.conv(format!("{name}.1x1"), x, c[0], 1, 1, 0);
    let r = n.conv(format!("{name}.3x3_reduce"), x, c[1], 1, 1, 0);
    n.conv(format!("{name}.3x3"), r, c[2], 3, 1, 1);
    let r = n.conv(format!("{name}.5x5_reduce"), x, c[3], 1, 1, 0);
    n.conv(format!("{name}.5x5"), r, c[4], 5, 1, 2);
    n.conv(format!("{name}.pool_proj"), x, c[5], 1, 1, 0);
    Shape {
        c: c[0] + c[2] + c[4] + c[5],
        ..x
    }
}

/// The original GoogLeNet table, without the training-only auxiliary heads.
pub fn googlenet() -> NetworkSpec {
    let mut n = Net::new();
    let x = n.conv("conv1.7x7_s2", INPUT, 64, 7, 2, 3);
    let x = pool_ceil(x, 3, 2);
    let x = n.conv("conv2.3x3_reduce", x, 64, 1, 1, 0);
    let x = n.conv("conv2.3x3", x, 192, 3, 1, 1);
    let x = pool_ceil(x, 3, 2);
    let x = inception_v1(&mut n, "inception_3a", x, [64, 96, 128, 16, 32, 32]);
    let x = inception_v1(&mut n, "inception_3b", x, [128, 128, 192, 32, 96, 64]);
    let x = pool_ceil(x, 3, 2);
    let x = inception_v1(&mut n, "inception_4a", x, [192, 96, 208, 16, 48, 64]);
    let x = inception_v1(&mut n, "inception_4b", x, [160, 112, 224, 24, 64, 64]);
    let x = inception_v1(&mut n, "inception_4c", x, [128, 128, 256, 24, 64, 64]);
    let x = inception_v1(&mut n, "inception_4d", x, [112, 144, 288, 32, 64, 64]);
    let x = inception_v1(&mut n, "inception_4e", x, [256, 160, 320, 32, 128, 128]);
    let x = pool_ceil(x, 3, 2);
    let x = inception_v1(&mut n, "inception_5a", x, [256, 160, 320, 32, 128, 128]);
    let x = inception_v1(&mut n, "inception_5b", x, [384, 192, 384, 48, 128, 128]);
    n.fc("loss3.classifier", x.c, 1000);
    n.finish("googlenet")
}

/// BN-Inception module. `c` = [1x1, 3x3 reduce, 3x3, double 3x3 reduce,
/// double 3x3, pool projection]; a zero 1x1 marks a stride-2 module whose
/// pool branch passes through unprojected.
fn inception_bn(n: &mut Net, name: &str, x: Shape, c: [u32; 6]) -> Shape {
    let stride = if c[0] == 0 { 2 } else { 1 };
    if c[0] > 0 {
        n.conv(format!("{name}.1x1"), x, c[0], 1, 1, 0);
    }
    let r = n.conv(format!("{name}.3x3_reduce"), x, c[1], 1, 1, 0);
    let y = n.conv(format!("{name}.3x3"), r, c[2], 3, stride, 1);
    let r = n.conv(format!("{name}.double_3x3_reduce"), x, c[3], 1, 1, 0);
    let d = n.conv(format!("{name}.double_3x3_1"), r, c[4], 3, 1, 1);
    n.conv(format!("{name}.double_3x3_2"), d, c[4], 3, stride, 1);
    let pool_c = if c[0] > 0 {
        n.conv(format!("{name}.pool_proj"), x, c[5], 1, 1, 0);
        c[5]
    } else {
        x.c
    };
    Shape {
        h: y.h,
        w: y.w,
        c: c[0] + c[2] + c[4] + pool_c,
    }
}

/// Inception with batch normalization (Ioffe and Szegedy).
pub fn bn_inception() -> NetworkSpec {
    let mut n = Net::new();
    let x = n.conv("conv1.7x7_s2", INPUT, 64, 7, 2, 3);
    let x = pool_ceil(x, 3, 2);
    let x = n.conv("conv2.3x3_reduce", x, 64, 1, 1, 0);
    let x = n.conv("conv2.3x3", x, 192, 3, 1, 1);
    let x = pool_ceil(x, 3, 2);
    let x = inception_bn(&mut n, "inception_3a", x, [64, 64, 64, 64, 96, 32]);
    let x = inception_bn(&mut n, "inception_3b", x, [64, 64, 96, 64, 96, 64]);
    let x = inception_bn(&mut n, "inception_3c", x, [0, 128, 160, 64, 96, 0]);
    let x = inception_bn(&mut n, "inception_4a", x, [224, 64, 96, 96, 128, 128]);
    let x = inception_bn(&mut n, "inception_4b", x, [192, 96, 128, 96, 128, 128]);
    let x = inception_bn(&mut n, "inception_4c", x, [160, 128, 160, 128, 160, 128]);
    let x = inception_bn(&mut n, "inception_4d", x, [96, 128, 192, 160, 192, 128]);
    let x = inception_bn(&mut n, "inception_4e", x, [0, 128, 192, 192, 256, 0]);
    let x = inception_bn(&mut n, "inception_5a", x, [352, 192, 320, 160, 224, 128]);
    let x = inception_bn(&mut n, "inception_5b", x, [352, 192, 320, 192, 224, 128]);
    n.fc("fc", x.c, 1000);
    n.finish("bn_inception")
}

/// Bottleneck stages shared by ResNet and ResNeXt. `width` is the 3x3
/// channel count of the first stage; output channels are 256 doubling per
/// stage.
fn bottleneck_net(n: &mut Net, blocks: [u32; 4], width: u32, groups: u32, stride_on_3x3: bool) -> u32 {
    let x = n.conv("conv1", INPUT, 64, 7, 2, 3);
    let mut x = pool(x, 3, 2, 1);
    for (stage, &count) in blocks.iter().enumerate() {
        let mid = width << stage;
        let c_out = 256 << stage;
        for block in 0..count {
            let stride = if stage > 0 && block == 0 { 2 } else { 1 };
            let (s1, s2) = if stride_on_3x3 { (1, stride) } else { (stride, 1) };
            let name = format!("layer{}.{block}", stage + 1);
            let y = n.conv(format!("{name}.conv1"), x, mid, 1, s1, 0);
            let y = n.conv_same(format!("{name}.conv2"), y, mid, 3, s2, groups);
            let y = n.conv(format!("{name}.conv3"), y, c_out, 1, 1, 0);
            if block == 0 {
                n.conv(format!("{name}.downsample"), x, c_out, 1, stride, 0);
            }
            x = y;
        }
    }
    x.c
}

/// ResNet-152 as originally published: downsampling stride on the first 1x1
/// of each stage.
pub fn resnet152() -> NetworkSpec {
    let mut n = Net::new();
    let c = bottleneck_net(&mut n, [3, 8, 36, 3], 64, 1, false);
    n.fc("fc", c, 1000);
    n.finish("resnet152")
}

/// ResNeXt-152 with cardinality 32 and 4 channels per group; stride on the
/// grouped 3x3.
pub fn resnext152_32x4d() -> NetworkSpec {
    let mut n = Net::new();
    let c = bottleneck_net(&mut n, [3, 8, 36, 3], 128, 32, true);
    n.fc("fc", c, 1000);
    n.finish("resnext152_32x4d")
}

pub fn densenet121() -> NetworkSpec {
    const GROWTH: u32 = 32;
    let mut n = Net::new();
    let x = n.conv("features.conv0", INPUT, 64, 7, 2, 3);
    let mut x = pool(x, 3, 2, 1);
    for (b, count) in [6, 12, 24, 16].into_iter().enumerate() {
        for l in 0..count {
            let name = format!("features.denseblock{}.denselayer{}", b + 1, l + 1);
            let y = n.conv(format!("{name}.conv1"), x, 4 * GROWTH, 1, 1, 0);
            n.conv(format!("{name}.conv2"), y, GROWTH, 3, 1, 1);
            x.c += GROWTH;
        }
        if b < 3 {
            let y = n.conv(format!("features.transition{}.conv", b + 1), x, x.c / 2, 1, 1, 0);
            x = pool(y, 2, 2, 0);
        }
    }
    n.fc("classifier", x.c, 1000);
    n.finish("densenet121")
}

/// Rounds to a multiple of 8 without dropping more than 10%.
fn make_divisible(v: u32) -> u32 {
    let rounded = ((v + 4) / 8 * 8).max(8);
    if 10 * rounded < 9 * v {
        rounded + 8
    } else {
        rounded
    }
}

/// Squeeze-and-excitation: two 1x1 convolutions on the pooled 1x1 tensor.
fn squeeze_excite(n: &mut Net, name: &str, x: Shape, squeeze: u32) {
    let pooled = Shape { h: 1, w: 1, c: x.c };
    let s = n.conv(format!("{name}.fc1"), pooled, squeeze, 1, 1, 0);
    n.conv(format!("{name}.fc2"), s, x.c, 1, 1, 0);
}

/// torchvision MobileNetV3-Large.
pub fn mobilenet_v3_large() -> NetworkSpec {
    // (kernel, expanded, out, squeeze-excite, stride)
    const BLOCKS: [(u32, u32, u32, bool, u32); 15] = [
        (3, 16, 16, false, 1),
        (3, 64, 24, false, 2),
        (3, 72, 24, false, 1),
        (5, 72, 40, true, 2),
        (5, 120, 40, true, 1),
        (5, 120, 40, true, 1),
        (3, 240, 80, false, 2),
        (3, 200, 80, false, 1),
        (3, 184, 80, false, 1),
        (3, 184, 80, false, 1),
        (3, 480, 112, true, 1),
        (3, 672, 112, true, 1),
        (5, 672, 160, true, 2),
        (5, 960, 160, true, 1),
        (5, 960, 160, true, 1),
    ];
    let mut n = Net::new();
    let mut x = n.conv_same("features.0", INPUT, 16, 3, 2, 1);
    for (i, (k, exp, c_out, se, stride)) in BLOCKS.into_iter().enumerate() {
        let name = format!("features.{}", i + 1);
        let mut y = x;
        if exp != x.c {
            y = n.conv(format!("{name}.expand"), y, exp, 1, 1, 0);
        }
        y = n.conv_same(format!("{name}.depthwise"), y, exp, k, stride, exp);
        if se {
            squeeze_excite(&mut n, &format!("{name}.se"), y, make_divisible(exp / 4));
        }
        x = n.conv(format!("{name}.project"), y, c_out, 1, 1, 0);
    }
    let x = n.conv("features.16", x, 960, 1, 1, 0);
    let c = n.fc("classifier.0", x.c, 1280);
    n.fc("classifier.3", c, 1000);
    n.finish("mobilenet_v3_large")
}

/// torchvision EfficientNet-B0.
pub fn efficientnet_b0() -> NetworkSpec {
    // (expand ratio, kernel, stride, out, repeats)
    const STAGES: [(u32, u32, u32, u32, u32); 7] = [
        (1, 3, 1, 16, 1),
        (6, 3, 2, 24, 2),
        (6, 5, 2, 40, 2),
        (6, 3, 2, 80, 3),
        (6, 5, 1, 112, 3),
        (6, 5, 2, 192, 4),
        (6, 3, 1, 320, 1),
    ];
    let mut n = Net::new();
    let mut x = n.conv_same("features.0", INPUT, 32, 3, 2, 1);
    for (s, (ratio, k, stride, c_out, repeats)) in STAGES.into_iter().enumerate() {
        for r in 0..repeats {
            let name = format!("features.{}.{r}", s + 1);
            let stride = if r == 0 { stride } else { 1 };
            let squeeze = (x.c / 4).max(1);
            let mut y = x;
            if ratio != 1 {
                y = n.conv(format!("{name}.expand"), y, x.c * ratio, 1, 1, 0);
            }
            y = n.conv_same(format!("{name}.depthwise"), y, y.c, k, stride, y.c);
            squeeze_excite(&mut n, &format!("{name}.se"), y, squeeze);
            x = n.conv(format!("{name}.project"), y, c_out, 1, 1, 0);
        }
    }
    let x = n.conv("features.8", x, 1280, 1, 1, 0);
    n.fc("classifier.1", x.c, 1000);
    n.finish("efficientnet_b0")
}

/// Every canned model, sorted by name.
pub fn all() -> Vec<NetworkSpec> {
    let mut models = vec![
        alexnet(),
        vgg16(),
        googlenet(),
        bn_inception(),
        resnet152(),
        densenet121(),
        resnext152_32x4d(),
        mobilenet_v3_large(),
        efficientnet_b0(),
    ];
    models.sort_by(|a, b| a.model_name.cmp(&b.model_name));
    models
}

pub fn by_name(name: &str) -> Option<NetworkSpec> {
    all().into_iter().find(|m| m.model_name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(net: &NetworkSpec) -> (usize, u128) {
        net.validate().unwrap();
        (net.layers.len(), net.total_macs().unwrap())
    }

    #[test]
    fn layer_counts_and_macs() {
        assert_eq!(summary(&alexnet()), (8, 714_188_480));
        assert_eq!(summary(&vgg16()), (16, 15_470_264_320));
        assert_eq!(summary(&googlenet()), (58, 1_582_671_872));
        assert_eq!(summary(&bn_inception()), (70, 2_032_600_064));
        assert_eq!(summary(&resnet152()), (156, 11_282_415_616));
        assert_eq!(summary(&resnext152_32x4d()), (156, 11_709_513_728));
        assert_eq!(summary(&densenet121()), (121, 2_834_161_664));
        assert_eq!(summary(&mobilenet_v3_large()), (64, 216_589_760));
        assert_eq!(summary(&efficientnet_b0()), (82, 385_814_752));
    }

    #[test]
    fn feature_maps_end_at_seven() {
        for net in [resnet152(), resnext152_32x4d(), densenet121(), googlenet(), bn_inception()] {
            let last_conv = net
                .layers
                .iter()
                .rev()
                .find(|l| l.kind == LayerKind::Conv2d)
                .unwrap();
            assert_eq!(last_conv.output_size(), (7, 7), "{}", net.model_name);
        }
    }

    #[test]
    fn squeeze_widths() {
        assert_eq!([72, 120, 480, 672, 960].map(|e| make_divisible(e / 4)), [24, 32, 120, 168, 240]);
    }

    #[test]
    fn names_are_unique_and_sorted() {
        let names: Vec<_> = all().into_iter().map(|m| m.model_name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(names, sorted);
        assert_eq!(names.len(), 9);
        assert!(by_name("resnet152").is_some());
    }
}
