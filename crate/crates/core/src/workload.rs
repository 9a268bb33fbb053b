//! Addition/multiplication counts for small convolutional networks.
//!
//! Each multiply-accumulate counts as one multiplication and one addition.
//! Bias additions, pooling and activations are not counted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::cost::WorkloadCounts;

/// Activation shape `(height, width, channels)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub h: u64,
    pub w: u64,
    pub c: u64,
}

impl Shape {
    pub const fn new(h: u64, w: u64, c: u64) -> Self {
        Shape { h, w, c }
    }

    pub fn flat(&self) -> u64 {
        self.h * self.w * self.c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LayerSpec {
    Conv {
        h_in: u64,
        w_in: u64,
        c_in: u64,
        c_out: u64,
        kernel: u64,
        stride: u64,
        padding: u64,
    },
    Fc {
        d_in: u64,
        d_out: u64,
    },
    /// Max pooling; carries no arithmetic in the count.
    Pool {
        h_in: u64,
        w_in: u64,
        c: u64,
        size: u64,
        stride: u64,
    },
}

fn out_dim(input: u64, kernel: u64, stride: u64, padding: u64) -> Option<u64> {
    let span = (input + 2 * padding).checked_sub(kernel)?;
    Some(span / stride + 1)
}

impl LayerSpec {
    pub const fn conv(
        h_in: u64,
        w_in: u64,
        c_in: u64,
        c_out: u64,
        kernel: u64,
        stride: u64,
        padding: u64,
    ) -> Self {
        LayerSpec::Conv {
            h_in,
            w_in,
            c_in,
            c_out,
            kernel,
            stride,
            padding,
        }
    }

    pub const fn fc(d_in: u64, d_out: u64) -> Self {
        LayerSpec::Fc { d_in, d_out }
    }

    pub const fn pool(h_in: u64, w_in: u64, c: u64, size: u64, stride: u64) -> Self {
        LayerSpec::Pool {
            h_in,
            w_in,
            c,
            size,
            stride,
        }
    }

    pub fn input_shape(&self) -> Shape {
        match *self {
            LayerSpec::Conv {
                h_in, w_in, c_in, ..
            } => Shape::new(h_in, w_in, c_in),
            LayerSpec::Fc { d_in, .. } => Shape::new(1, 1, d_in),
            LayerSpec::Pool { h_in, w_in, c, .. } => Shape::new(h_in, w_in, c),
        }
    }

    pub fn output_shape(&self) -> Result<Shape> {
        let positive = |name: &str, v: u64| {
            if v == 0 {
                Err(Error::Shape(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        };
        match *self {
            LayerSpec::Conv {
                h_in,
                w_in,
                c_in,
                c_out,
                kernel,
                stride,
                padding,
            } => {
                for (name, v) in [
                    ("h_in", h_in),
                    ("w_in", w_in),
                    ("c_in", c_in),
                    ("c_out", c_out),
                    ("kernel", kernel),
                    ("stride", stride),
                ] {
                    positive(name, v)?;
                }
                let h = out_dim(h_in, kernel, stride, padding);
                let w = out_dim(w_in, kernel, stride, padding);
                match (h, w) {
                    (Some(h), Some(w)) => Ok(Shape::new(h, w, c_out)),
                    _ => Err(Error::Shape(format!(
                        "conv kernel {kernel} does not fit a {h_in}x{w_in} input with padding {padding}"
                    ))),
                }
            }
            LayerSpec::Fc { d_in, d_out } => {
                positive("d_in", d_in)?;
                positive("d_out", d_out)?;
                Ok(Shape::new(1, 1, d_out))
            }
            LayerSpec::Pool {
                h_in,
                w_in,
                c,
                size,
                stride,
            } => {
                for (name, v) in [
                    ("h_in", h_in),
                    ("w_in", w_in),
                    ("c", c),
                    ("size", size),
                    ("stride", stride),
                ] {
                    positive(name, v)?;
                }
                match (
                    out_dim(h_in, size, stride, 0),
                    out_dim(w_in, size, stride, 0),
                ) {
                    (Some(h), Some(w)) => Ok(Shape::new(h, w, c)),
                    _ => Err(Error::Shape(format!(
                        "pool window {size} does not fit a {h_in}x{w_in} input"
                    ))),
                }
            }
        }
    }

    pub fn macs(&self) -> Result<u64> {
        let out = self.output_shape()?;
        Ok(match *self {
            LayerSpec::Conv { c_in, kernel, .. } => out.h * out.w * out.c * kernel * kernel * c_in,
            LayerSpec::Fc { d_in, d_out } => d_in * d_out,
            LayerSpec::Pool { .. } => 0,
        })
    }
}

/// `x = y = MACs` for one layer.
pub fn layer_counts(l: &LayerSpec) -> Result<WorkloadCounts> {
    let macs = l.macs()?;
    Ok(WorkloadCounts::new(macs, macs))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub name: String,
    pub input: Shape,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Checks that each layer consumes the previous layer's output. A fully
    /// connected layer accepts the flattened activation.
    pub fn validate(&self) -> Result<()> {
        let mut cur = self.input;
        for (i, layer) in self.layers.iter().enumerate() {
            let expected = layer.input_shape();
            let ok = match layer {
                LayerSpec::Fc { d_in, .. } => *d_in == cur.flat(),
                _ => expected == cur,
            };
            if !ok {
                return Err(Error::Shape(format!(
                    "layer {i}: expects input {expected:?} but receives {cur:?}"
                )));
            }
            cur = layer
                .output_shape()
                .map_err(|e| Error::Shape(format!("layer {i}: {e}")))?;
        }
        Ok(())
    }

    /// Per-layer counts, in layer order.
    pub fn layer_table(&self) -> Result<Vec<WorkloadCounts>> {
        self.validate()?;
        self.layers.iter().map(layer_counts).collect()
    }
}

/// Componentwise sum of the layers' counts.
pub fn network_counts(net: &NetworkSpec) -> Result<WorkloadCounts> {
    Ok(net.layer_table()?.into_iter().sum())
}

pub const PRESETS: [&str; 2] = ["alexnet-cifar10", "vgg16-cifar10"];

fn conv3(hw: u64, c_in: u64, c_out: u64) -> LayerSpec {
    LayerSpec::conv(hw, hw, c_in, c_out, 3, 1, 1)
}

fn pool2(hw: u64, c: u64) -> LayerSpec {
    LayerSpec::pool(hw, hw, c, 2, 2)
}

/// Fixed CIFAR-10 (32x32x3 input) network stacks.
pub fn preset(name: &str) -> Result<NetworkSpec> {
    let layers = match name {
        "alexnet-cifar10" => vec![
            conv3(32, 3, 64),
            pool2(32, 64),
            conv3(16, 64, 192),
            pool2(16, 192),
            conv3(8, 192, 384),
            conv3(8, 384, 256),
            conv3(8, 256, 256),
            pool2(8, 256),
            LayerSpec::fc(4096, 4096),
            LayerSpec::fc(4096, 4096),
            LayerSpec::fc(4096, 10),
        ],
        "vgg16-cifar10" => vec![
            conv3(32, 3, 64),
            conv3(32, 64, 64),
            pool2(32, 64),
            conv3(16, 64, 128),
            conv3(16, 128, 128),
            pool2(16, 128),
            conv3(8, 128, 256),
            conv3(8, 256, 256),
            conv3(8, 256, 256),
            pool2(8, 256),
            conv3(4, 256, 512),
            conv3(4, 512, 512),
            conv3(4, 512, 512),
            pool2(4, 512),
            conv3(2, 512, 512),
            conv3(2, 512, 512),
            conv3(2, 512, 512),
            pool2(2, 512),
            LayerSpec::fc(512, 4096),
            LayerSpec::fc(4096, 4096),
            LayerSpec::fc(4096, 10),
        ],
        _ => {
            return Err(Error::NotFound {
                kind: "preset",
                name: name.to_string(),
                available: PRESETS.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(NetworkSpec {
        name: name.to_string(),
        input: Shape::new(32, 32, 3),
        layers,
    })
}

/// Contents of a workload file: raw counts or a layer stack, never both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WorkloadFile {
    Counts(WorkloadCounts),
    Network(NetworkSpec),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorkloadFile {
    x: Option<u64>,
    y: Option<u64>,
    name: Option<String>,
    input: Option<Shape>,
    layers: Option<Vec<LayerSpec>>,
}

impl WorkloadFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawWorkloadFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("workload: {e}")))?;
        let has_counts = raw.x.is_some() || raw.y.is_some();
        match (has_counts, raw.layers) {
            (true, Some(_)) => Err(Error::Config(
                "workload: `x`/`y` and `layers` are mutually exclusive".into(),
            )),
            (false, None) => Err(Error::Config(
                "workload: expected either `x` and `y` or `layers`".into(),
            )),
            (true, None) => {
                if raw.name.is_some() || raw.input.is_some() {
                    return Err(Error::Config(
                        "workload: `name`/`input` only apply to `layers` workloads".into(),
                    ));
                }
                match (raw.x, raw.y) {
                    (Some(x), Some(y)) => Ok(WorkloadFile::Counts(WorkloadCounts::new(x, y))),
                    _ => Err(Error::Config(
                        "workload: both `x` and `y` are required".into(),
                    )),
                }
            }
            (false, Some(layers)) => {
                let input = match (raw.input, layers.first()) {
                    (Some(s), _) => s,
                    (None, Some(LayerSpec::Fc { d_in, .. })) => Shape::new(1, 1, *d_in),
                    (None, Some(l)) => l.input_shape(),
                    (None, None) => Shape::new(1, 1, 1),
                };
                let net = NetworkSpec {
                    name: raw.name.unwrap_or_else(|| "custom".into()),
                    input,
                    layers,
                };
                net.validate()?;
                Ok(WorkloadFile::Network(net))
            }
        }
    }

    pub fn counts(&self) -> Result<WorkloadCounts> {
        match self {
            WorkloadFile::Counts(c) => Ok(*c),
            WorkloadFile::Network(net) => network_counts(net),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layer_examples() {
        let c = layer_counts(&LayerSpec::conv(32, 32, 3, 64, 3, 1, 1)).unwrap();
        assert_eq!(c, WorkloadCounts::new(1_769_472, 1_769_472));
        assert_eq!(32 * 32 * 64 * 9 * 3, 1_769_472);
        assert_eq!(
            layer_counts(&LayerSpec::fc(4096, 10)).unwrap(),
            WorkloadCounts::new(40_960, 40_960)
        );
        assert!(matches!(
            layer_counts(&LayerSpec::conv(3, 3, 1, 1, 5, 1, 0)),
            Err(Error::Shape(_))
        ));
        assert!(layer_counts(&LayerSpec::conv(3, 3, 1, 1, 3, 0, 0)).is_err());
    }

    #[test]
    fn strided_conv_shape() {
        // (32 + 4 - 5) / 2 + 1 = 16
        let l = LayerSpec::conv(32, 32, 3, 8, 5, 2, 2);
        assert_eq!(l.output_shape().unwrap(), Shape::new(16, 16, 8));
    }

    #[test]
    fn network_examples() {
        let empty = NetworkSpec {
            name: "empty".into(),
            input: Shape::new(32, 32, 3),
            layers: vec![],
        };
        assert_eq!(network_counts(&empty).unwrap(), WorkloadCounts::default());
        let one = NetworkSpec {
            layers: vec![LayerSpec::conv(32, 32, 3, 64, 3, 1, 1)],
            ..empty.clone()
        };
        assert_eq!(
            network_counts(&one).unwrap(),
            layer_counts(&one.layers[0]).unwrap()
        );

        let broken = NetworkSpec {
            layers: vec![
                LayerSpec::conv(32, 32, 3, 64, 3, 1, 1),
                LayerSpec::conv(32, 32, 32, 64, 3, 1, 1),
            ],
            ..empty
        };
        assert!(matches!(network_counts(&broken), Err(Error::Shape(m)) if m.contains("layer 1")));
    }

    #[test]
    fn presets_are_well_formed() {
        for name in PRESETS {
            let net = preset(name).unwrap();
            net.validate().unwrap();
        }
        assert_eq!(
            preset("vgg16-cifar10").unwrap().layers[0],
            LayerSpec::conv(32, 32, 3, 64, 3, 1, 1)
        );
        match preset("resnet50") {
            Err(Error::NotFound { available, .. }) => assert_eq!(available.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn preset_totals_recomputed() {
        // alexnet: per-layer MACs written out by hand
        let alex = [
            32 * 32 * 64 * 9 * 3,
            16 * 16 * 192 * 9 * 64,
            8 * 8 * 384 * 9 * 192,
            8 * 8 * 256 * 9 * 384,
            8 * 8 * 256 * 9 * 256,
            4096 * 4096,
            4096 * 4096,
            4096 * 10,
        ];
        let total: u64 = alex.iter().sum();
        assert_eq!(
            network_counts(&preset("alexnet-cifar10").unwrap()).unwrap(),
            WorkloadCounts::new(total, total)
        );

        let vgg = [
            32 * 32 * 64 * 9 * 3,
            32 * 32 * 64 * 9 * 64,
            16 * 16 * 128 * 9 * 64,
            16 * 16 * 128 * 9 * 128,
            8 * 8 * 256 * 9 * 128,
            2 * 8 * 8 * 256 * 9 * 256,
            4 * 4 * 512 * 9 * 256,
            2 * 4 * 4 * 512 * 9 * 512,
            3 * 2 * 2 * 512 * 9 * 512,
            512 * 4096,
            4096 * 4096,
            4096 * 10,
        ];
        let total: u64 = vgg.iter().sum();
        assert_eq!(
            network_counts(&preset("vgg16-cifar10").unwrap()).unwrap(),
            WorkloadCounts::new(total, total)
        );
    }

    #[test]
    fn workload_file_forms() {
        assert_eq!(
            WorkloadFile::from_json(r#"{"x": 10, "y": 20}"#)
                .unwrap()
                .counts()
                .unwrap(),
            WorkloadCounts::new(10, 20)
        );
        let layers = r#"{"name":"tiny","input":{"h":8,"w":8,"c":1},"layers":[
            {"kind":"conv","h_in":8,"w_in":8,"c_in":1,"c_out":2,"kernel":3,"stride":1,"padding":0},
            {"kind":"fc","d_in":72,"d_out":10}]}"#;
        let f = WorkloadFile::from_json(layers).unwrap();
        let macs = 6 * 6 * 2 * 9 + 72 * 10;
        assert_eq!(f.counts().unwrap(), WorkloadCounts::new(macs, macs));

        assert!(matches!(
            WorkloadFile::from_json(r#"{"x":1,"y":1,"layers":[]}"#),
            Err(Error::Config(_))
        ));
        assert!(WorkloadFile::from_json(r#"{"x":1}"#).is_err());
        assert!(WorkloadFile::from_json(r#"{}"#).is_err());
        assert!(matches!(
            WorkloadFile::from_json(r#"{"x":1,"y":1,"z":2}"#),
            Err(Error::Parse(_))
        ));
        assert!(WorkloadFile::from_json(r#"{"layers":[{"kind":"conv","d_in":3}]}"#).is_err());
        assert!(WorkloadFile::from_json(
            r#"{"layers":[{"kind":"fc","d_in":3,"d_out":2,"extra":1}]}"#
        )
        .is_err());
    }

    fn conv_strategy() -> impl Strategy<Value = LayerSpec> {
        (1u64..64, 1u64..16, 1u64..16, 1u64..6, 1u64..4, 0u64..3).prop_filter_map(
            "kernel fits",
            |(hw, ci, co, k, s, p)| {
                let l = LayerSpec::conv(hw, hw, ci, co, k, s, p);
                l.output_shape().ok().map(|_| l)
            },
        )
    }

    proptest! {
        #[test]
        fn doubling_c_out_doubles_macs(l in conv_strategy()) {
            let LayerSpec::Conv { h_in, w_in, c_in, c_out, kernel, stride, padding } = l else { unreachable!() };
            let doubled = LayerSpec::conv(h_in, w_in, c_in, 2 * c_out, kernel, stride, padding);
            prop_assert_eq!(doubled.macs().unwrap(), 2 * l.macs().unwrap());
        }

        #[test]
        fn counts_are_additive(split in 0usize..=21) {
            let net = preset("vgg16-cifar10").unwrap();
            let (head, tail) = net.layers.split_at(split);
            let head_counts: WorkloadCounts = head.iter().map(|l| layer_counts(l).unwrap()).sum();
            let tail_counts: WorkloadCounts = tail.iter().map(|l| layer_counts(l).unwrap()).sum();
            prop_assert_eq!(network_counts(&net).unwrap(), head_counts + tail_counts);
        }
    }
}
