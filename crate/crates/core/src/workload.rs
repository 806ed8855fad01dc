//! Layer and network descriptions and their lowering to GEMM workloads.
//!
//! Convolutions are lowered with im2col semantics at batch size 1: every
//! output pixel becomes one activation row (`m`), every receptive-field
//! element of one channel group becomes a reduction index (`k`) and every
//! filter of the group an output column (`n`). A grouped convolution turns
//! into `groups` identical GEMMs executed back to back (`repeat`).

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LayerKind {
    Conv2d,
    FullyConnected,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    pub input_h: u32,
    pub input_w: u32,
    pub c_in: u32,
    pub c_out: u32,
    pub kernel_h: u32,
    pub kernel_w: u32,
    pub stride_h: u32,
    pub stride_w: u32,
    pub dilation_h: u32,
    pub dilation_w: u32,
    /// Symmetric padding per side.
    pub pad_h: u32,
    pub pad_w: u32,
    pub groups: u32,
}

fn out_extent(input: u32, pad: u32, dilation: u32, kernel: u32, stride: u32) -> i64 {
    let span = i64::from(dilation) * (i64::from(kernel) - 1) + 1;
    let numer = i64::from(input) + 2 * i64::from(pad) - span;
    numer.div_euclid(i64::from(stride)) + 1
}

impl LayerSpec {
    /// A square convolution with unit dilation.
    #[allow(clippy::too_many_arguments)]
    pub fn conv(
        name: impl Into<String>,
        input: u32,
        c_in: u32,
        c_out: u32,
        kernel: u32,
        stride: u32,
        pad: u32,
        groups: u32,
    ) -> Self {
        LayerSpec {
            name: name.into(),
            kind: LayerKind::Conv2d,
            input_h: input,
            input_w: input,
            c_in,
            c_out,
            kernel_h: kernel,
            kernel_w: kernel,
            stride_h: stride,
            stride_w: stride,
            dilation_h: 1,
            dilation_w: 1,
            pad_h: pad,
            pad_w: pad,
            groups,
        }
    }

    pub fn fully_connected(name: impl Into<String>, c_in: u32, c_out: u32) -> Self {
        LayerSpec {
            name: name.into(),
            kind: LayerKind::FullyConnected,
            input_h: 1,
            input_w: 1,
            c_in,
            c_out,
            kernel_h: 1,
            kernel_w: 1,
            stride_h: 1,
            stride_w: 1,
            dilation_h: 1,
            dilation_w: 1,
            pad_h: 0,
            pad_w: 0,
            groups: 1,
        }
    }

    /// Output spatial size, which may be below 1 for degenerate layers.
    pub fn output_size(&self) -> (i64, i64) {
        (
            out_extent(
                self.input_h,
                self.pad_h,
                self.dilation_h,
                self.kernel_h,
                self.stride_h,
            ),
            out_extent(
                self.input_w,
                self.pad_w,
                self.dilation_w,
                self.kernel_w,
                self.stride_w,
            ),
        )
    }

    fn invalid(&self, reason: &'static str) -> Error {
        Error::InvalidLayer {
            layer: self.name.clone(),
            reason,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.input_h,
            self.input_w,
            self.c_in,
            self.c_out,
            self.kernel_h,
            self.kernel_w,
            self.stride_h,
            self.stride_w,
            self.dilation_h,
            self.dilation_w,
            self.groups,
        ];
        if positive.contains(&0) {
            return Err(self.invalid("sizes, channels, kernel, stride, dilation and groups must be positive"));
        }
        if !self.c_in.is_multiple_of(self.groups) || !self.c_out.is_multiple_of(self.groups) {
            return Err(self.invalid("groups must divide c_in and c_out"));
        }
        if self.kind == LayerKind::FullyConnected {
            let unit = [
                self.input_h,
                self.input_w,
                self.kernel_h,
                self.kernel_w,
                self.stride_h,
                self.stride_w,
                self.dilation_h,
                self.dilation_w,
                self.groups,
            ];
            if unit.iter().any(|&v| v != 1) || self.pad_h != 0 || self.pad_w != 0 {
                return Err(self.invalid(
                    "fully_connected layers need unit spatial, kernel, stride, dilation and groups and zero padding",
                ));
            }
        }
        let (out_h, out_w) = self.output_size();
        if out_h < 1 || out_w < 1 {
            return Err(Error::DegenerateOutput {
                layer: self.name.clone(),
                out_h,
                out_w,
            });
        }
        Ok(())
    }

    /// MAC count straight from the layer geometry, independent of lowering.
    pub fn macs(&self) -> Result<u128> {
        self.validate()?;
        let (out_h, out_w) = self.output_size();
        Ok(out_h as u128
            * out_w as u128
            * u128::from(self.kernel_h)
            * u128::from(self.kernel_w)
            * u128::from(self.c_in / self.groups)
            * u128::from(self.c_out))
    }
}

/// One GEMM `(m x k) . (k x n)`, executed `repeat` times back to back.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GemmWorkload {
    /// Activation rows streamed through the array.
    pub m: u64,
    /// Reduction length, tiled along the array height.
    pub k: u64,
    /// Output features, tiled along the array width.
    pub n: u64,
    /// Number of serialized identical GEMMs (one per group).
    pub repeat: u64,
    pub source_layer: String,
}

impl GemmWorkload {
    pub fn new(m: u64, k: u64, n: u64, repeat: u64) -> Result<Self> {
        let w = GemmWorkload {
            m,
            k,
            n,
            repeat,
            source_layer: String::new(),
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 || self.n == 0 || self.repeat == 0 {
            return Err(Error::InvalidWorkload("m, k, n and repeat must be positive"));
        }
        Ok(())
    }

    pub fn macs(&self) -> u128 {
        u128::from(self.m) * u128::from(self.k) * u128::from(self.n) * u128::from(self.repeat)
    }
}

pub fn lower_layer(layer: &LayerSpec) -> Result<GemmWorkload> {
    layer.validate()?;
    let workload = match layer.kind {
        LayerKind::Conv2d => {
            let (out_h, out_w) = layer.output_size();
            GemmWorkload {
                m: out_h as u64 * out_w as u64,
                k: u64::from(layer.kernel_h)
                    * u64::from(layer.kernel_w)
                    * u64::from(layer.c_in / layer.groups),
                n: u64::from(layer.c_out / layer.groups),
                repeat: u64::from(layer.groups),
                source_layer: layer.name.clone(),
            }
        }
        LayerKind::FullyConnected => GemmWorkload {
            m: 1,
            k: u64::from(layer.c_in),
            n: u64::from(layer.c_out),
            repeat: 1,
            source_layer: layer.name.clone(),
        },
    };
    Ok(workload)
}

/// A model as a flat, ordered list of GEMM-producing layers.
///
/// Branches, skip connections, pooling and concatenations produce no GEMM
/// work, so each layer carries its own input size instead of inheriting it
/// from its predecessor.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct NetworkSpec {
    pub model_name: String,
    pub input_h: u32,
    pub input_w: u32,
    pub layers: Vec<LayerSpec>,
}

/// A layer whose input size differs from the output size of the layer
/// before it (pooling, a branch, or a skip path).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainBreak {
    pub index: usize,
    pub previous_output: (i64, i64),
    pub input: (u32, u32),
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidNetwork("layer list is empty"));
        }
        if self.input_h == 0 || self.input_w == 0 {
            return Err(Error::InvalidNetwork("input size must be positive"));
        }
        let first = &self.layers[0];
        if first.kind == LayerKind::Conv2d
            && (first.input_h != self.input_h || first.input_w != self.input_w)
        {
            return Err(Error::InvalidNetwork(
                "first convolution must consume the network input size",
            ));
        }
        for layer in &self.layers {
            layer.validate().map_err(|e| Error::InLayer {
                layer: layer.name.clone(),
                source: Box::new(e),
            })?;
        }
        Ok(())
    }

    /// Layers whose declared input does not chain from their predecessor.
    pub fn chain_breaks(&self) -> Vec<ChainBreak> {
        self.layers
            .windows(2)
            .enumerate()
            .filter_map(|(i, pair)| {
                let previous_output = pair[0].output_size();
                let input = (pair[1].input_h, pair[1].input_w);
                let chained = previous_output == (i64::from(input.0), i64::from(input.1));
                (!chained).then_some(ChainBreak {
                    index: i + 1,
                    previous_output,
                    input,
                })
            })
            .collect()
    }

    pub fn total_macs(&self) -> Result<u128> {
        self.layers.iter().map(LayerSpec::macs).sum()
    }
}

pub fn lower_network(net: &NetworkSpec) -> Result<Vec<GemmWorkload>> {
    if net.layers.is_empty() {
        return Err(Error::InvalidNetwork("layer list is empty"));
    }
    net.validate()?;
    net.layers
        .iter()
        .map(|layer| {
            lower_layer(layer).map_err(|e| Error::InLayer {
                layer: layer.name.clone(),
                source: Box::new(e),
            })
        })
        .collect()
}
