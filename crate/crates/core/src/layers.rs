//! Network layers with hand-written backward passes: standard, depthwise and
//! pointwise convolution, ReLU, sigmoid, global average pooling, dense, and
//! softmax.
//!
//! Convolution is centered cross-correlation. "Same" padding needs an odd
//! kernel and zero-pads by (Dk−1)/2 so that H' = ⌈H/stride⌉; "valid" slides
//! the kernel fully inside the input. All functions are pure; backward passes
//! are the exact analytic gradients of the forwards and are verified against
//! central finite differences in the test suite.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Zero-padding policy of a convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Padding {
    Same,
    Valid,
}

/// Output extent of one spatial axis.
pub fn conv_out_extent(extent: usize, dk: usize, stride: usize, padding: Padding) -> Result<usize> {
    if stride == 0 {
        return Err(Error::param("conv", "stride must be ≥ 1"));
    }
    match padding {
        Padding::Same => {
            if dk % 2 == 0 {
                return Err(Error::param("conv", format!("same padding needs odd kernel, got {dk}")));
            }
            Ok(extent.div_ceil(stride))
        }
        Padding::Valid => {
            if extent < dk {
                return Err(Error::shape("conv", format!("extent {extent} smaller than kernel {dk}")));
            }
            Ok((extent - dk) / stride + 1)
        }
    }
}

fn pad_amount(dk: usize, padding: Padding) -> usize {
    match padding {
        Padding::Same => (dk - 1) / 2,
        Padding::Valid => 0,
    }
}

fn dims4(t: &Tensor, op: &'static str) -> Result<(usize, usize, usize, usize)> {
    if t.rank() != 4 {
        return Err(Error::shape(op, format!("rank {} tensor, need rank 4", t.rank())));
    }
    let s = t.shape();
    Ok((s[0], s[1], s[2], s[3]))
}

fn check_bias(bias: Option<&Tensor>, n_out: usize, op: &'static str) -> Result<()> {
    if let Some(b) = bias {
        if b.rank() != 1 || b.shape()[0] != n_out {
            return Err(Error::shape(op, format!("bias {:?} vs {n_out} output channels", b.shape())));
        }
    }
    Ok(())
}

/// Standard convolution: every output channel is a weighted sum over all
/// input channels. Kernel layout is [n_out, m, dk, dk].
pub fn conv_standard_fwd(
    x: &Tensor,
    kernel: &Tensor,
    bias: Option<&Tensor>,
    stride: usize,
    padding: Padding,
) -> Result<Tensor> {
    let (n, m, h, w) = dims4(x, "conv_standard")?;
    let (n_out, km, dk, dk2) = dims4(kernel, "conv_standard")?;
    if dk != dk2 {
        return Err(Error::param("conv_standard", format!("non-square kernel {dk}x{dk2}")));
    }
    if km != m {
        return Err(Error::shape(
            "conv_standard",
            format!("input has {m} channels, kernel expects {km}"),
        ));
    }
    check_bias(bias, n_out, "conv_standard")?;
    let h_out = conv_out_extent(h, dk, stride, padding)?;
    let w_out = conv_out_extent(w, dk, stride, padding)?;
    let pad = pad_amount(dk, padding) as isize;

    let xd = x.data();
    let kd = kernel.data();
    let mut out = Tensor::zeros(&[n, n_out, h_out, w_out]);
    let od = out.data_mut();
    for ni in 0..n {
        for ko in 0..n_out {
            let obase = (ni * n_out + ko) * h_out * w_out;
            for oy in 0..h_out {
                for ox in 0..w_out {
                    let mut acc = bias.map_or(0.0, |b| b.data()[ko]);
                    for mi in 0..m {
                        let xbase = (ni * m + mi) * h * w;
                        let kbase = (ko * m + mi) * dk * dk;
                        for p in 0..dk {
                            let iy = (oy * stride + p) as isize - pad;
                            if iy < 0 || iy >= h as isize {
                                continue;
                            }
                            for q in 0..dk {
                                let ix = (ox * stride + q) as isize - pad;
                                if ix < 0 || ix >= w as isize {
                                    continue;
                                }
                                acc += kd[kbase + p * dk + q]
                                    * xd[xbase + iy as usize * w + ix as usize];
                            }
                        }
                    }
                    od[obase + oy * w_out + ox] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of [`conv_standard_fwd`] with respect to input, kernel and bias.
pub fn conv_standard_bwd(
    x: &Tensor,
    kernel: &Tensor,
    stride: usize,
    padding: Padding,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (n, m, h, w) = dims4(x, "conv_standard_bwd")?;
    let (n_out, _, dk, _) = dims4(kernel, "conv_standard_bwd")?;
    let expect_h = conv_out_extent(h, dk, stride, padding)?;
    let expect_w = conv_out_extent(w, dk, stride, padding)?;
    if grad_out.shape() != [n, n_out, expect_h, expect_w] {
        return Err(Error::shape(
            "conv_standard_bwd",
            format!("upstream {:?} vs forward output [{n}, {n_out}, {expect_h}, {expect_w}]", grad_out.shape()),
        ));
    }
    let pad = pad_amount(dk, padding) as isize;

    let xd = x.data();
    let kd = kernel.data();
    let gd = grad_out.data();
    let mut grad_x = Tensor::zeros(x.shape());
    let mut grad_k = Tensor::zeros(kernel.shape());
    let mut grad_b = Tensor::zeros(&[n_out]);
    for ni in 0..n {
        for ko in 0..n_out {
            let obase = (ni * n_out + ko) * expect_h * expect_w;
            for oy in 0..expect_h {
                for ox in 0..expect_w {
                    let g = gd[obase + oy * expect_w + ox];
                    grad_b.data_mut()[ko] += g;
                    for mi in 0..m {
                        let xbase = (ni * m + mi) * h * w;
                        let kbase = (ko * m + mi) * dk * dk;
                        for p in 0..dk {
                            let iy = (oy * stride + p) as isize - pad;
                            if iy < 0 || iy >= h as isize {
                                continue;
                            }
                            for q in 0..dk {
                                let ix = (ox * stride + q) as isize - pad;
                                if ix < 0 || ix >= w as isize {
                                    continue;
                                }
                                let xi = xbase + iy as usize * w + ix as usize;
                                grad_x.data_mut()[xi] += kd[kbase + p * dk + q] * g;
                                grad_k.data_mut()[kbase + p * dk + q] += xd[xi] * g;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((grad_x, grad_k, grad_b))
}

/// Depthwise convolution: each channel is convolved independently with its
/// own filter, no channel mixing and no bias. Kernel layout is [m, dk, dk].
pub fn conv_depthwise_fwd(
    x: &Tensor,
    kernel: &Tensor,
    stride: usize,
    padding: Padding,
) -> Result<Tensor> {
    let (n, m, h, w) = dims4(x, "conv_depthwise")?;
    if kernel.rank() != 3 {
        return Err(Error::shape(
            "conv_depthwise",
            format!("kernel rank {}, need [m, dk, dk]", kernel.rank()),
        ));
    }
    let (km, dk, dk2) = (kernel.shape()[0], kernel.shape()[1], kernel.shape()[2]);
    if dk != dk2 {
        return Err(Error::param("conv_depthwise", format!("non-square kernel {dk}x{dk2}")));
    }
    if km != m {
        return Err(Error::shape(
            "conv_depthwise",
            format!("input has {m} channels, kernel has {km} filters"),
        ));
    }
    let h_out = conv_out_extent(h, dk, stride, padding)?;
    let w_out = conv_out_extent(w, dk, stride, padding)?;
    let pad = pad_amount(dk, padding) as isize;

    let xd = x.data();
    let kd = kernel.data();
    let mut out = Tensor::zeros(&[n, m, h_out, w_out]);
    let od = out.data_mut();
    for ni in 0..n {
        for mi in 0..m {
            let xbase = (ni * m + mi) * h * w;
            let kbase = mi * dk * dk;
            let obase = (ni * m + mi) * h_out * w_out;
            for oy in 0..h_out {
                for ox in 0..w_out {
                    let mut acc = 0.0;
                    for p in 0..dk {
                        let iy = (oy * stride + p) as isize - pad;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for q in 0..dk {
                            let ix = (ox * stride + q) as isize - pad;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            acc += kd[kbase + p * dk + q] * xd[xbase + iy as usize * w + ix as usize];
                        }
                    }
                    od[obase + oy * w_out + ox] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of [`conv_depthwise_fwd`] with respect to input and kernel.
pub fn conv_depthwise_bwd(
    x: &Tensor,
    kernel: &Tensor,
    stride: usize,
    padding: Padding,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor)> {
    let (n, m, h, w) = dims4(x, "conv_depthwise_bwd")?;
    let dk = kernel.shape()[1];
    let expect_h = conv_out_extent(h, dk, stride, padding)?;
    let expect_w = conv_out_extent(w, dk, stride, padding)?;
    if grad_out.shape() != [n, m, expect_h, expect_w] {
        return Err(Error::shape(
            "conv_depthwise_bwd",
            format!("upstream {:?} vs forward output [{n}, {m}, {expect_h}, {expect_w}]", grad_out.shape()),
        ));
    }
    let pad = pad_amount(dk, padding) as isize;

    let xd = x.data();
    let kd = kernel.data();
    let gd = grad_out.data();
    let mut grad_x = Tensor::zeros(x.shape());
    let mut grad_k = Tensor::zeros(kernel.shape());
    for ni in 0..n {
        for mi in 0..m {
            let xbase = (ni * m + mi) * h * w;
            let kbase = mi * dk * dk;
            let obase = (ni * m + mi) * expect_h * expect_w;
            for oy in 0..expect_h {
                for ox in 0..expect_w {
                    let g = gd[obase + oy * expect_w + ox];
                    for p in 0..dk {
                        let iy = (oy * stride + p) as isize - pad;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for q in 0..dk {
                            let ix = (ox * stride + q) as isize - pad;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let xi = xbase + iy as usize * w + ix as usize;
                            grad_x.data_mut()[xi] += kd[kbase + p * dk + q] * g;
                            grad_k.data_mut()[kbase + p * dk + q] += xd[xi] * g;
                        }
                    }
                }
            }
        }
    }
    Ok((grad_x, grad_k))
}

/// Pointwise (1×1) convolution: a per-position linear map across channels.
/// Kernel layout is [n_out, m, 1, 1]; spatial extents are preserved.
pub fn conv_pointwise_fwd(x: &Tensor, kernel: &Tensor, bias: Option<&Tensor>) -> Result<Tensor> {
    let (n, m, h, w) = dims4(x, "conv_pointwise")?;
    let (n_out, km, kh, kw) = dims4(kernel, "conv_pointwise")?;
    if kh != 1 || kw != 1 {
        return Err(Error::param(
            "conv_pointwise",
            format!("kernel spatial extent {kh}x{kw}, need 1x1"),
        ));
    }
    if km != m {
        return Err(Error::shape(
            "conv_pointwise",
            format!("input has {m} channels, kernel expects {km}"),
        ));
    }
    check_bias(bias, n_out, "conv_pointwise")?;

    let xd = x.data();
    let kd = kernel.data();
    let hw = h * w;
    let mut out = Tensor::zeros(&[n, n_out, h, w]);
    let od = out.data_mut();
    for ni in 0..n {
        for ko in 0..n_out {
            let obase = (ni * n_out + ko) * hw;
            let b = bias.map_or(0.0, |bv| bv.data()[ko]);
            for i in 0..hw {
                let mut acc = b;
                for mi in 0..m {
                    acc += kd[ko * m + mi] * xd[(ni * m + mi) * hw + i];
                }
                od[obase + i] = acc;
            }
        }
    }
    Ok(out)
}

/// Gradients of [`conv_pointwise_fwd`] with respect to input, kernel and bias.
pub fn conv_pointwise_bwd(
    x: &Tensor,
    kernel: &Tensor,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (n, m, h, w) = dims4(x, "conv_pointwise_bwd")?;
    let (n_out, _, _, _) = dims4(kernel, "conv_pointwise_bwd")?;
    if grad_out.shape() != [n, n_out, h, w] {
        return Err(Error::shape(
            "conv_pointwise_bwd",
            format!("upstream {:?} vs forward output [{n}, {n_out}, {h}, {w}]", grad_out.shape()),
        ));
    }
    let xd = x.data();
    let kd = kernel.data();
    let gd = grad_out.data();
    let hw = h * w;
    let mut grad_x = Tensor::zeros(x.shape());
    let mut grad_k = Tensor::zeros(kernel.shape());
    let mut grad_b = Tensor::zeros(&[n_out]);
    for ni in 0..n {
        for ko in 0..n_out {
            let obase = (ni * n_out + ko) * hw;
            for i in 0..hw {
                let g = gd[obase + i];
                grad_b.data_mut()[ko] += g;
                for mi in 0..m {
                    let xi = (ni * m + mi) * hw + i;
                    grad_x.data_mut()[xi] += kd[ko * m + mi] * g;
                    grad_k.data_mut()[ko * m + mi] += xd[xi] * g;
                }
            }
        }
    }
    Ok((grad_x, grad_k, grad_b))
}

/// Depthwise-separable block: depthwise → ReLU → pointwise → ReLU.
pub fn dsc_block_fwd(
    x: &Tensor,
    dw_kernel: &Tensor,
    dw_stride: usize,
    dw_padding: Padding,
    pw_kernel: &Tensor,
    pw_bias: Option<&Tensor>,
) -> Result<Tensor> {
    let after_dw = conv_depthwise_fwd(x, dw_kernel, dw_stride, dw_padding)?;
    let after_relu = relu_fwd(&after_dw);
    let after_pw = conv_pointwise_fwd(&after_relu, pw_kernel, pw_bias)?;
    Ok(relu_fwd(&after_pw))
}

/// Elementwise max(0, x).
pub fn relu_fwd(x: &Tensor) -> Tensor {
    let data = x.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
    Tensor::new(x.shape(), data).expect("same shape")
}

/// ReLU gradient; takes the forward *input*. The subgradient at exactly 0 is 0.
pub fn relu_bwd(x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if x.shape() != grad_out.shape() {
        return Err(Error::shape("relu_bwd", format!("{:?} vs {:?}", x.shape(), grad_out.shape())));
    }
    let data = x
        .iter()
        .zip(grad_out.iter())
        .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(x.shape(), data)
}

/// Elementwise logistic function 1 / (1 + e^{−x}).
pub fn sigmoid_fwd(x: &Tensor) -> Tensor {
    let data = x.iter().map(|&v| sigmoid_scalar(v)).collect();
    Tensor::new(x.shape(), data).expect("same shape")
}

pub(crate) fn sigmoid_scalar(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        // avoids overflow of e^{−v} for very negative v
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Sigmoid gradient; takes the forward *output* y = σ(x).
pub fn sigmoid_bwd(y: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if y.shape() != grad_out.shape() {
        return Err(Error::shape("sigmoid_bwd", format!("{:?} vs {:?}", y.shape(), grad_out.shape())));
    }
    let data = y
        .iter()
        .zip(grad_out.iter())
        .map(|(&s, &g)| g * s * (1.0 - s))
        .collect();
    Tensor::new(y.shape(), data)
}

/// Global average pooling: per-channel spatial mean, N×C×H×W → N×C.
pub fn gap_fwd(x: &Tensor) -> Result<Tensor> {
    let (n, c, h, w) = dims4(x, "gap")?;
    let hw = (h * w) as f64;
    let mut out = Tensor::zeros(&[n, c]);
    for ni in 0..n {
        for ci in 0..c {
            let base = (ni * c + ci) * h * w;
            out.data_mut()[ni * c + ci] = x.data()[base..base + h * w].iter().sum::<f64>() / hw;
        }
    }
    Ok(out)
}

/// GAP gradient: distributes g/(H·W) to every spatial position.
pub fn gap_bwd(input_shape: &[usize], grad_out: &Tensor) -> Result<Tensor> {
    if input_shape.len() != 4 {
        return Err(Error::shape("gap_bwd", format!("input shape {input_shape:?}, need rank 4")));
    }
    let (n, c, h, w) = (input_shape[0], input_shape[1], input_shape[2], input_shape[3]);
    if grad_out.shape() != [n, c] {
        return Err(Error::shape("gap_bwd", format!("upstream {:?} vs [{n}, {c}]", grad_out.shape())));
    }
    let hw = (h * w) as f64;
    let mut grad_x = Tensor::zeros(input_shape);
    for ni in 0..n {
        for ci in 0..c {
            let g = grad_out.data()[ni * c + ci] / hw;
            let base = (ni * c + ci) * h * w;
            for v in &mut grad_x.data_mut()[base..base + h * w] {
                *v = g;
            }
        }
    }
    Ok(grad_x)
}

/// Affine map o = W·z + b on row vectors: z is N×C_in, weight is C_out×C_in.
pub fn dense_fwd(z: &Tensor, weight: &Tensor, bias: Option<&Tensor>) -> Result<Tensor> {
    if z.rank() != 2 || weight.rank() != 2 {
        return Err(Error::shape(
            "dense",
            format!("z rank {} / weight rank {}, need 2", z.rank(), weight.rank()),
        ));
    }
    let (n, c_in) = (z.shape()[0], z.shape()[1]);
    let (c_out, wc_in) = (weight.shape()[0], weight.shape()[1]);
    if wc_in != c_in {
        return Err(Error::shape("dense", format!("z has {c_in} features, weight expects {wc_in}")));
    }
    check_bias(bias, c_out, "dense")?;
    let mut out = Tensor::zeros(&[n, c_out]);
    for ni in 0..n {
        for co in 0..c_out {
            let mut acc = bias.map_or(0.0, |b| b.data()[co]);
            for ci in 0..c_in {
                acc += weight.data()[co * c_in + ci] * z.data()[ni * c_in + ci];
            }
            out.data_mut()[ni * c_out + co] = acc;
        }
    }
    Ok(out)
}

/// Gradients of [`dense_fwd`] with respect to input, weight and bias.
pub fn dense_bwd(z: &Tensor, weight: &Tensor, grad_out: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    let (n, c_in) = (z.shape()[0], z.shape()[1]);
    let (c_out, _) = (weight.shape()[0], weight.shape()[1]);
    if grad_out.shape() != [n, c_out] {
        return Err(Error::shape("dense_bwd", format!("upstream {:?} vs [{n}, {c_out}]", grad_out.shape())));
    }
    let mut grad_z = Tensor::zeros(z.shape());
    let mut grad_w = Tensor::zeros(weight.shape());
    let mut grad_b = Tensor::zeros(&[c_out]);
    for ni in 0..n {
        for co in 0..c_out {
            let g = grad_out.data()[ni * c_out + co];
            grad_b.data_mut()[co] += g;
            for ci in 0..c_in {
                grad_z.data_mut()[ni * c_in + ci] += weight.data()[co * c_in + ci] * g;
                grad_w.data_mut()[co * c_in + ci] += z.data()[ni * c_in + ci] * g;
            }
        }
    }
    Ok((grad_z, grad_w, grad_b))
}

/// Numerically stabilized softmax over the last axis of an N×C tensor.
/// Rows sum to 1 within 1e-12 and every output is strictly positive.
pub fn softmax_fwd(logits: &Tensor) -> Result<Tensor> {
    if logits.rank() != 2 {
        return Err(Error::shape("softmax", format!("rank {} tensor, need N×C", logits.rank())));
    }
    if !logits.all_finite() {
        return Err(Error::NonFinite("softmax logits".into()));
    }
    let (n, c) = (logits.shape()[0], logits.shape()[1]);
    let mut out = Tensor::zeros(&[n, c]);
    for ni in 0..n {
        let row = &logits.data()[ni * c..(ni + 1) * c];
        let max = row.iter().fold(f64::MIN, |m, &v| m.max(v));
        let mut sum = 0.0;
        for (i, &v) in row.iter().enumerate() {
            let e = (v - max).exp();
            out.data_mut()[ni * c + i] = e;
            sum += e;
        }
        for v in &mut out.data_mut()[ni * c..(ni + 1) * c] {
            *v /= sum;
        }
    }
    Ok(out)
}

/// Softmax gradient; takes the forward *output* p:
/// dL/do_i = p_i·(g_i − Σ_j g_j p_j) per row.
pub fn softmax_bwd(probs: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if probs.shape() != grad_out.shape() {
        return Err(Error::shape("softmax_bwd", format!("{:?} vs {:?}", probs.shape(), grad_out.shape())));
    }
    let (n, c) = (probs.shape()[0], probs.shape()[1]);
    let mut grad = Tensor::zeros(probs.shape());
    for ni in 0..n {
        let p = &probs.data()[ni * c..(ni + 1) * c];
        let g = &grad_out.data()[ni * c..(ni + 1) * c];
        let inner: f64 = p.iter().zip(g).map(|(pi, gi)| pi * gi).sum();
        for i in 0..c {
            grad.data_mut()[ni * c + i] = p[i] * (g[i] - inner);
        }
    }
    Ok(grad)
}
