use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool_backward, maxpool_forward, relu_backward,
    relu_forward,
};
use super::tensor::{Scalar, Tensor};
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    /// Valid, stride-1 convolution with a square kernel.
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
    },
    /// 2x2 window, stride 2.
    MaxPool2d,
    Relu,
    Flatten,
    Dense {
        in_features: usize,
        out_features: usize,
    },
}

impl LayerSpec {
    /// Output shape for a given input shape, or an error if incompatible.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, NnError> {
        match (*self, input) {
            (
                LayerSpec::Conv2d {
                    in_channels,
                    out_channels,
                    kernel,
                },
                &[c, h, w],
            ) => {
                if c != in_channels || kernel == 0 || h < kernel || w < kernel {
                    return Err(NnError::Build(format!(
                        "conv2d(in={in_channels}, k={kernel}) cannot take input {input:?}"
                    )));
                }
                Ok(vec![out_channels, h - kernel + 1, w - kernel + 1])
            }
            (LayerSpec::MaxPool2d, &[c, h, w]) => {
                if h < 2 || w < 2 {
                    return Err(NnError::Build(format!("maxpool cannot take input {input:?}")));
                }
                Ok(vec![c, h / 2, w / 2])
            }
            (LayerSpec::Relu, _) => Ok(input.to_vec()),
            (LayerSpec::Flatten, _) => Ok(vec![input.iter().product()]),
            (
                LayerSpec::Dense {
                    in_features,
                    out_features,
                },
                &[n],
            ) if n == in_features => Ok(vec![out_features]),
            (spec, _) => Err(NnError::Build(format!("{spec:?} cannot take input {input:?}"))),
        }
    }

    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
            } => vec![vec![out_channels, in_channels, kernel, kernel], vec![out_channels]],
            LayerSpec::Dense {
                in_features,
                out_features,
            } => vec![vec![out_features, in_features], vec![out_features]],
            _ => Vec::new(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.param_shapes().iter().map(|s| s.iter().product::<usize>()).sum()
    }

    fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::Conv2d {
                in_channels, kernel, ..
            } => in_channels * kernel * kernel,
            LayerSpec::Dense { in_features, .. } => in_features,
            _ => 0,
        }
    }
}

/// A layer and its parameters (`[weights, bias]` for conv/dense, none otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T = f32> {
    pub spec: LayerSpec,
    pub params: Vec<Tensor<T>>,
}

/// Widths of the default three-convolution network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchConfig {
    pub conv_widths: [usize; 3],
    pub kernel: usize,
    pub hidden: usize,
}

impl Default for ArchConfig {
    fn default() -> Self {
        ArchConfig {
            conv_widths: [8, 16, 32],
            kernel: 3,
            hidden: 128,
        }
    }
}

impl ArchConfig {
    /// `conv -> relu -> pool` three times, then `flatten -> dense -> relu -> dense`.
    pub fn layer_specs(&self, input_shape: [usize; 3], num_classes: usize) -> Result<Vec<LayerSpec>, NnError> {
        let mut specs = Vec::new();
        let mut shape = input_shape.to_vec();
        let mut push = |spec: LayerSpec, specs: &mut Vec<LayerSpec>| -> Result<(), NnError> {
            shape = spec.output_shape(&shape)?;
            specs.push(spec);
            Ok(())
        };
        let mut channels = input_shape[0];
        for &width in &self.conv_widths {
            push(
                LayerSpec::Conv2d {
                    in_channels: channels,
                    out_channels: width,
                    kernel: self.kernel,
                },
                &mut specs,
            )?;
            push(LayerSpec::Relu, &mut specs)?;
            push(LayerSpec::MaxPool2d, &mut specs)?;
            channels = width;
        }
        push(LayerSpec::Flatten, &mut specs)?;
        let flat = specs.iter().try_fold(input_shape.to_vec(), |s, l| l.output_shape(&s))?[0];
        specs.push(LayerSpec::Dense {
            in_features: flat,
            out_features: self.hidden,
        });
        specs.push(LayerSpec::Relu);
        specs.push(LayerSpec::Dense {
            in_features: self.hidden,
            out_features: num_classes,
        });
        Ok(specs)
    }
}

/// Parameter gradients per layer, in the order of `Layer::params`.
pub type LayerGrads<T> = Vec<Vec<Tensor<T>>>;

/// Ordered layer stack mapping a `[C, H, W]` image to class logits.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel<T = f32> {
    pub input_shape: [usize; 3],
    pub num_classes: usize,
    pub layers: Vec<Layer<T>>,
}

/// Activations retained by a training forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    /// `inputs[i]` is the input to layer `i`; the last entry is the logits.
    pub inputs: Vec<Tensor<T>>,
    pool_routes: Vec<Option<Vec<usize>>>,
}

impl<T: Scalar> ForwardCache<T> {
    pub fn logits(&self) -> &Tensor<T> {
        self.inputs.last().expect("cache holds at least the input")
    }
}

impl<T: Scalar> CnnModel<T> {
    /// Checks shape compatibility of `specs` and initializes weights with
    /// He-uniform fan-in scaling (`U(-sqrt(6/fan_in), sqrt(6/fan_in))`), biases zero.
    pub fn build(specs: &[LayerSpec], input_shape: [usize; 3], num_classes: usize, seed: u64) -> Result<Self, NnError> {
        let out = specs.iter().try_fold(input_shape.to_vec(), |s, l| l.output_shape(&s))?;
        if out != [num_classes] {
            return Err(NnError::Build(format!(
                "network produces {out:?}, expected [{num_classes}]"
            )));
        }
        if num_classes < 2 {
            return Err(NnError::Build("need at least two classes".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = specs
            .iter()
            .map(|&spec| {
                let shapes = spec.param_shapes();
                let params = shapes
                    .iter()
                    .enumerate()
                    .map(|(i, shape)| {
                        if i == 0 {
                            let limit = (6.0 / spec.fan_in() as f64).sqrt();
                            Tensor::from_fn(shape, |_| T::from_f64(rng.random_range(-limit..limit)))
                        } else {
                            Tensor::zeros(shape)
                        }
                    })
                    .collect();
                Layer { spec, params }
            })
            .collect();
        Ok(CnnModel {
            input_shape,
            num_classes,
            layers,
        })
    }

    /// The default architecture for the given input and class count.
    pub fn default_for(
        arch: &ArchConfig,
        input_shape: [usize; 3],
        num_classes: usize,
        seed: u64,
    ) -> Result<Self, NnError> {
        let specs = arch.layer_specs(input_shape, num_classes)?;
        Self::build(&specs, input_shape, num_classes, seed)
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.spec.param_count()).sum()
    }

    pub fn params(&self) -> impl Iterator<Item = &Tensor<T>> {
        self.layers.iter().flat_map(|l| l.params.iter())
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut Tensor<T>> {
        self.layers.iter_mut().flat_map(|l| l.params.iter_mut())
    }

    pub fn cast<U: Scalar>(&self) -> CnnModel<U> {
        CnnModel {
            input_shape: self.input_shape,
            num_classes: self.num_classes,
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    spec: l.spec,
                    params: l.params.iter().map(Tensor::cast).collect(),
                })
                .collect(),
        }
    }

    fn check_input(&self, input: &Tensor<T>) -> Result<(), NnError> {
        if input.dims() != self.input_shape {
            return Err(NnError::InputShape {
                expected: self.input_shape.to_vec(),
                got: input.dims().to_vec(),
            });
        }
        Ok(())
    }

    /// Logits for one image.
    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        self.check_input(input)?;
        let mut x = input.clone();
        for layer in &self.layers {
            x = apply(layer, &x)?.0;
        }
        Ok(x)
    }

    pub fn forward_cached(&self, input: &Tensor<T>) -> Result<ForwardCache<T>, NnError> {
        self.check_input(input)?;
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        let mut pool_routes = Vec::with_capacity(self.layers.len());
        inputs.push(input.clone());
        for layer in &self.layers {
            let (y, routes) = apply(layer, inputs.last().unwrap())?;
            inputs.push(y);
            pool_routes.push(routes);
        }
        Ok(ForwardCache { inputs, pool_routes })
    }

    /// Back-propagates `grad_logits` through the cached pass. Returns the
    /// gradient with respect to the input image and per-layer parameter
    /// gradients (same layout as `layers[i].params`).
    pub fn backward(
        &self,
        cache: &ForwardCache<T>,
        grad_logits: &Tensor<T>,
    ) -> Result<(Tensor<T>, LayerGrads<T>), NnError> {
        let mut grad = grad_logits.clone();
        let mut param_grads = vec![Vec::new(); self.layers.len()];
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let x = &cache.inputs[i];
            grad = match layer.spec {
                LayerSpec::Conv2d { .. } => {
                    let g = conv2d_backward(x, &layer.params[0], &layer.params[1], &grad)?;
                    param_grads[i] = vec![g.weights, g.bias];
                    g.input
                }
                LayerSpec::Dense { .. } => {
                    let g = dense_backward(x, &layer.params[0], &layer.params[1], &grad)?;
                    param_grads[i] = vec![g.weights, g.bias];
                    g.input
                }
                LayerSpec::MaxPool2d => {
                    let routes = cache.pool_routes[i].as_deref().expect("pool routes cached");
                    maxpool_backward(x.dims(), routes, &grad)?
                }
                LayerSpec::Relu => relu_backward(x, &grad)?,
                LayerSpec::Flatten => grad.reshape(x.dims())?,
            };
        }
        Ok((grad, param_grads))
    }
}

fn apply<T: Scalar>(layer: &Layer<T>, x: &Tensor<T>) -> Result<(Tensor<T>, Option<Vec<usize>>), NnError> {
    Ok(match layer.spec {
        LayerSpec::Conv2d { .. } => (conv2d_forward(x, &layer.params[0], &layer.params[1])?, None),
        LayerSpec::Dense { .. } => (dense_forward(x, &layer.params[0], &layer.params[1])?, None),
        LayerSpec::MaxPool2d => {
            let (y, routes) = maxpool_forward(x)?;
            (y, Some(routes))
        }
        LayerSpec::Relu => (relu_forward(x), None),
        LayerSpec::Flatten => {
            let n = x.len();
            (x.clone().reshape(&[n])?, None)
        }
    })
}
