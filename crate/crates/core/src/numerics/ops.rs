//! Forward kernels and their adjoints.
//!
//! Convolutions are lowered to matrix products through `im2col`/`col2im`;
//! every product goes through [`gemm`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Elementwise nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu(alpha) => {
                if x > 0.0 {
                    x
                } else {
                    alpha * x
                }
            }
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => libm::tanh(x),
        }
    }

    /// Derivative expressed through the input `x` and output `y`.
    pub(crate) fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(alpha) => {
                if x > 0.0 {
                    1.0
                } else {
                    alpha
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + libm::log1p(libm::exp(-x.abs()))
}

/// `c (m×n) = op(a) · op(b) [+ c]` where `op` optionally transposes the
/// stored row-major operand.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_transposed: bool,
    b: &[f64],
    b_transposed: bool,
    c: &mut [f64],
    accumulate: bool,
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        if !accumulate {
            c[..m * n].iter_mut().for_each(|v| *v = 0.0);
        }
        return;
    }
    let (rsa, csa) = if a_transposed { (1, m) } else { (k, 1) };
    let (rsb, csb) = if b_transposed { (1, k) } else { (n, 1) };
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: the asserts above guarantee every index reached by the given
    // strides lies inside the slices, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Spatial geometry of one convolution: input plane, kernel, stride, padding
/// and the resulting output plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ConvGeometry {
    pub channels: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub kh: usize,
    pub kw: usize,
    pub sh: usize,
    pub sw: usize,
    pub ph: usize,
    pub pw: usize,
    pub out_h: usize,
    pub out_w: usize,
}

impl ConvGeometry {
    pub fn new(
        channels: usize,
        (in_h, in_w): (usize, usize),
        (kh, kw): (usize, usize),
        (sh, sw): (usize, usize),
        (ph, pw): (usize, usize),
    ) -> Result<Self> {
        if kh == 0 || kw == 0 || sh == 0 || sw == 0 {
            return Err(Error::Shape(format!(
                "kernel {kh}x{kw} and stride {sh}x{sw} must be positive"
            )));
        }
        if in_h + 2 * ph < kh || in_w + 2 * pw < kw {
            return Err(Error::Shape(format!(
                "kernel {kh}x{kw} does not fit padded input {}x{} (height x width)",
                in_h + 2 * ph,
                in_w + 2 * pw
            )));
        }
        Ok(ConvGeometry {
            channels,
            in_h,
            in_w,
            kh,
            kw,
            sh,
            sw,
            ph,
            pw,
            out_h: (in_h + 2 * ph - kh) / sh + 1,
            out_w: (in_w + 2 * pw - kw) / sw + 1,
        })
    }

    /// Geometry of the convolution whose adjoint maps an `in_h × in_w` plane
    /// to the largest-compatible-minimal output `(in-1)·s − 2p + k`.
    pub fn for_transpose(
        channels: usize,
        (in_h, in_w): (usize, usize),
        (kh, kw): (usize, usize),
        (sh, sw): (usize, usize),
        (ph, pw): (usize, usize),
    ) -> Result<Self> {
        if kh == 0 || kw == 0 || sh == 0 || sw == 0 {
            return Err(Error::Shape(format!(
                "kernel {kh}x{kw} and stride {sh}x{sw} must be positive"
            )));
        }
        let full_h = (in_h - 1) * sh + kh;
        let full_w = (in_w - 1) * sw + kw;
        if full_h <= 2 * ph || full_w <= 2 * pw {
            return Err(Error::Shape(format!(
                "padding {ph}x{pw} removes the whole transposed output {full_h}x{full_w}"
            )));
        }
        let geo = ConvGeometry::new(
            channels,
            (full_h - 2 * ph, full_w - 2 * pw),
            (kh, kw),
            (sh, sw),
            (ph, pw),
        )?;
        debug_assert_eq!((geo.out_h, geo.out_w), (in_h, in_w));
        Ok(geo)
    }

    pub fn patch_len(&self) -> usize {
        self.channels * self.kh * self.kw
    }

    pub fn out_len(&self) -> usize {
        self.out_h * self.out_w
    }

    pub fn in_len(&self) -> usize {
        self.channels * self.in_h * self.in_w
    }

    /// Unfolds one image `[channels, in_h, in_w]` into `[patch_len, out_len]`.
    pub fn im2col(&self, image: &[f64], cols: &mut [f64]) {
        let p = self.out_len();
        for c in 0..self.channels {
            let plane = &image[c * self.in_h * self.in_w..(c + 1) * self.in_h * self.in_w];
            for i in 0..self.kh {
                for j in 0..self.kw {
                    let row = ((c * self.kh + i) * self.kw + j) * p;
                    for oy in 0..self.out_h {
                        let y = (oy * self.sh + i) as isize - self.ph as isize;
                        let dst = &mut cols[row + oy * self.out_w..row + (oy + 1) * self.out_w];
                        if y < 0 || y as usize >= self.in_h {
                            dst.iter_mut().for_each(|v| *v = 0.0);
                            continue;
                        }
                        let src = &plane[y as usize * self.in_w..(y as usize + 1) * self.in_w];
                        for (ox, d) in dst.iter_mut().enumerate() {
                            let x = (ox * self.sw + j) as isize - self.pw as isize;
                            *d = if x < 0 || x as usize >= self.in_w {
                                0.0
                            } else {
                                src[x as usize]
                            };
                        }
                    }
                }
            }
        }
    }

    /// Folds `[patch_len, out_len]` back onto an image, accumulating overlaps.
    pub fn col2im(&self, cols: &[f64], image: &mut [f64]) {
        let p = self.out_len();
        for c in 0..self.channels {
            let plane = &mut image[c * self.in_h * self.in_w..(c + 1) * self.in_h * self.in_w];
            for i in 0..self.kh {
                for j in 0..self.kw {
                    let row = ((c * self.kh + i) * self.kw + j) * p;
                    for oy in 0..self.out_h {
                        let y = (oy * self.sh + i) as isize - self.ph as isize;
                        if y < 0 || y as usize >= self.in_h {
                            continue;
                        }
                        let src = &cols[row + oy * self.out_w..row + (oy + 1) * self.out_w];
                        let dst = &mut plane[y as usize * self.in_w..(y as usize + 1) * self.in_w];
                        for (ox, s) in src.iter().enumerate() {
                            let x = (ox * self.sw + j) as isize - self.pw as isize;
                            if x >= 0 && (x as usize) < self.in_w {
                                dst[x as usize] += s;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn check_bias(b: &Tensor, channels: usize, what: &str) -> Result<()> {
    if b.shape() != [channels] {
        return Err(Error::Shape(format!(
            "{what} bias must have shape [{channels}], got {:?}",
            b.shape()
        )));
    }
    Ok(())
}

fn conv_geometry(
    x: &Tensor,
    w: &Tensor,
    stride: (usize, usize),
    padding: (usize, usize),
) -> Result<(usize, usize, ConvGeometry)> {
    let [n, c, h, wd] = x.dims4("conv2d input")?;
    let [out_c, in_c, kh, kw] = w.dims4("conv2d kernel")?;
    if in_c != c {
        return Err(Error::Shape(format!(
            "conv2d kernel in_channels axis is {in_c} but input channel axis is {c}"
        )));
    }
    let geo = ConvGeometry::new(c, (h, wd), (kh, kw), stride, padding)?;
    Ok((n, out_c, geo))
}

/// Cross-correlation of `x [batch, in_ch, H, W]` with `w [out_ch, in_ch, kh, kw]`
/// plus a per-output-channel bias.
pub fn conv2d(x: &Tensor, w: &Tensor, b: &Tensor, stride: (usize, usize), padding: (usize, usize)) -> Result<Tensor> {
    let (n, out_c, geo) = conv_geometry(x, w, stride, padding)?;
    check_bias(b, out_c, "conv2d")?;
    let (k, p) = (geo.patch_len(), geo.out_len());
    let mut out = Tensor::zeros(&[n, out_c, geo.out_h, geo.out_w]);
    let mut cols = vec![0.0; k * p];
    for s in 0..n {
        geo.im2col(x.row(s), &mut cols);
        let y = &mut out.data_mut()[s * out_c * p..(s + 1) * out_c * p];
        for (o, chunk) in y.chunks_mut(p).enumerate() {
            chunk.iter_mut().for_each(|v| *v = b.data()[o]);
        }
        gemm(out_c, k, p, w.data(), false, &cols, false, y, true);
    }
    Ok(out)
}

pub(crate) struct ConvGrads {
    pub x: Option<Tensor>,
    pub w: Option<Tensor>,
    pub b: Option<Tensor>,
}

pub(crate) fn conv2d_backward(
    x: &Tensor,
    w: &Tensor,
    gy: &Tensor,
    stride: (usize, usize),
    padding: (usize, usize),
    need: [bool; 3],
) -> Result<ConvGrads> {
    let (n, out_c, geo) = conv_geometry(x, w, stride, padding)?;
    let (k, p) = (geo.patch_len(), geo.out_len());
    let mut gx = need[0].then(|| Tensor::zeros(x.shape()));
    let mut gw = need[1].then(|| Tensor::zeros(w.shape()));
    let gb = need[2].then(|| {
        let mut gb = Tensor::zeros(&[out_c]);
        for s in 0..n {
            for (o, chunk) in gy.row(s).chunks(p).enumerate() {
                gb.data_mut()[o] += chunk.iter().sum::<f64>();
            }
        }
        gb
    });
    let mut cols = vec![0.0; k * p];
    for s in 0..n {
        let g = gy.row(s);
        if let Some(gw) = gw.as_mut() {
            geo.im2col(x.row(s), &mut cols);
            gemm(out_c, p, k, g, false, &cols, true, gw.data_mut(), true);
        }
        if let Some(gx) = gx.as_mut() {
            gemm(k, out_c, p, w.data(), true, g, false, &mut cols, false);
            let len = geo.in_len();
            geo.col2im(&cols, &mut gx.data_mut()[s * len..(s + 1) * len]);
        }
    }
    Ok(ConvGrads { x: gx, w: gw, b: gb })
}

fn transpose_geometry(
    x: &Tensor,
    w: &Tensor,
    stride: (usize, usize),
    padding: (usize, usize),
) -> Result<(usize, usize, ConvGeometry)> {
    let [n, c, h, wd] = x.dims4("conv2d_transpose input")?;
    let [in_c, out_c, kh, kw] = w.dims4("conv2d_transpose kernel")?;
    if in_c != c {
        return Err(Error::Shape(format!(
            "conv2d_transpose kernel leading axis is {in_c} but input channel axis is {c}"
        )));
    }
    let geo = ConvGeometry::for_transpose(out_c, (h, wd), (kh, kw), stride, padding)?;
    Ok((n, c, geo))
}

/// Adjoint of [`conv2d`] with respect to its input, plus bias.
///
/// `w` has the layout of the forward convolution it transposes:
/// `[in_ch (of x), out_ch, kh, kw]`. Output spatial size is
/// `(H − 1)·s − 2p + k`.
pub fn conv2d_transpose(
    x: &Tensor,
    w: &Tensor,
    b: &Tensor,
    stride: (usize, usize),
    padding: (usize, usize),
) -> Result<Tensor> {
    let (n, in_c, geo) = transpose_geometry(x, w, stride, padding)?;
    check_bias(b, geo.channels, "conv2d_transpose")?;
    let (k, p) = (geo.patch_len(), geo.out_len());
    let len = geo.in_len();
    let mut out = Tensor::zeros(&[n, geo.channels, geo.in_h, geo.in_w]);
    let mut cols = vec![0.0; k * p];
    let plane = geo.in_h * geo.in_w;
    for s in 0..n {
        gemm(k, in_c, p, w.data(), true, x.row(s), false, &mut cols, false);
        let y = &mut out.data_mut()[s * len..(s + 1) * len];
        for (c, chunk) in y.chunks_mut(plane).enumerate() {
            chunk.iter_mut().for_each(|v| *v = b.data()[c]);
        }
        geo.col2im(&cols, y);
    }
    Ok(out)
}

pub(crate) fn conv2d_transpose_backward(
    x: &Tensor,
    w: &Tensor,
    gy: &Tensor,
    stride: (usize, usize),
    padding: (usize, usize),
    need: [bool; 3],
) -> Result<ConvGrads> {
    let (n, in_c, geo) = transpose_geometry(x, w, stride, padding)?;
    let (k, p) = (geo.patch_len(), geo.out_len());
    let plane = geo.in_h * geo.in_w;
    let mut gx = need[0].then(|| Tensor::zeros(x.shape()));
    let mut gw = need[1].then(|| Tensor::zeros(w.shape()));
    let gb = need[2].then(|| {
        let mut gb = Tensor::zeros(&[geo.channels]);
        for s in 0..n {
            for (c, chunk) in gy.row(s).chunks(plane).enumerate() {
                gb.data_mut()[c] += chunk.iter().sum::<f64>();
            }
        }
        gb
    });
    if gx.is_none() && gw.is_none() {
        return Ok(ConvGrads {
            x: None,
            w: None,
            b: gb,
        });
    }
    let mut cols = vec![0.0; k * p];
    for s in 0..n {
        geo.im2col(gy.row(s), &mut cols);
        if let Some(gx) = gx.as_mut() {
            let dst = &mut gx.data_mut()[s * in_c * p..(s + 1) * in_c * p];
            gemm(in_c, k, p, w.data(), false, &cols, false, dst, false);
        }
        if let Some(gw) = gw.as_mut() {
            gemm(in_c, p, k, x.row(s), false, &cols, true, gw.data_mut(), true);
        }
    }
    Ok(ConvGrads { x: gx, w: gw, b: gb })
}

fn dense_dims(x: &Tensor, w: &Tensor) -> Result<(usize, usize, usize)> {
    let [batch, n_in] = x.dims2("dense input")?;
    let [n_out, w_in] = w.dims2("dense weight")?;
    if w_in != n_in {
        return Err(Error::Shape(format!(
            "dense weight n_in axis is {w_in} but input feature axis is {n_in}"
        )));
    }
    Ok((batch, n_in, n_out))
}

/// `x · wᵀ + b` for `x [batch, n_in]`, `w [n_out, n_in]`, `b [n_out]`.
pub fn dense(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (batch, n_in, n_out) = dense_dims(x, w)?;
    check_bias(b, n_out, "dense")?;
    let mut out = Tensor::zeros(&[batch, n_out]);
    for row in out.data_mut().chunks_mut(n_out) {
        row.copy_from_slice(b.data());
    }
    gemm(
        batch,
        n_in,
        n_out,
        x.data(),
        false,
        w.data(),
        true,
        out.data_mut(),
        true,
    );
    Ok(out)
}

pub(crate) fn dense_backward(x: &Tensor, w: &Tensor, gy: &Tensor, need: [bool; 3]) -> Result<ConvGrads> {
    let (batch, n_in, n_out) = dense_dims(x, w)?;
    let gx = need[0].then(|| {
        let mut gx = Tensor::zeros(x.shape());
        gemm(
            batch,
            n_out,
            n_in,
            gy.data(),
            false,
            w.data(),
            false,
            gx.data_mut(),
            false,
        );
        gx
    });
    let gw = need[1].then(|| {
        let mut gw = Tensor::zeros(w.shape());
        gemm(
            n_out,
            batch,
            n_in,
            gy.data(),
            true,
            x.data(),
            false,
            gw.data_mut(),
            false,
        );
        gw
    });
    let gb = need[2].then(|| {
        let mut gb = Tensor::zeros(&[n_out]);
        for row in gy.data().chunks(n_out) {
            gb.data_mut().iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        gb
    });
    Ok(ConvGrads { x: gx, w: gw, b: gb })
}

pub fn activation(x: &Tensor, kind: Activation) -> Tensor {
    x.map(|v| kind.apply(v))
}

/// Non-overlapping max pooling over `window = (h, w)` with stride equal to the
/// window. Trailing rows/columns that do not fill a window are dropped. Ties go
/// to the first element in row-major order.
pub fn max_pool2d(x: &Tensor, window: (usize, usize)) -> Result<Tensor> {
    max_pool2d_indexed(x, window).map(|(t, _)| t)
}

pub(crate) fn max_pool2d_indexed(x: &Tensor, (wh, ww): (usize, usize)) -> Result<(Tensor, Vec<usize>)> {
    let [n, c, h, w] = x.dims4("max_pool2d input")?;
    if wh == 0 || ww == 0 || wh > h || ww > w {
        return Err(Error::Shape(format!(
            "pool window {wh}x{ww} does not fit input plane {h}x{w}"
        )));
    }
    let (oh, ow) = (h / wh, w / ww);
    let mut out = Tensor::zeros(&[n, c, oh, ow]);
    let mut argmax = Vec::with_capacity(n * c * oh * ow);
    let src = x.data();
    for plane in 0..n * c {
        let base = plane * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = base + oy * wh * w + ox * ww;
                for i in 0..wh {
                    for j in 0..ww {
                        let idx = base + (oy * wh + i) * w + ox * ww + j;
                        if src[idx] > src[best] {
                            best = idx;
                        }
                    }
                }
                out.data_mut()[(plane * oh + oy) * ow + ox] = src[best];
                argmax.push(best);
            }
        }
    }
    Ok((out, argmax))
}

fn check_binary_targets(logits: &Tensor, targets: &Tensor) -> Result<()> {
    if logits.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} logits but {} targets",
            logits.len(),
            targets.len()
        )));
    }
    if let Some(t) = targets.data().iter().find(|&&t| t != 0.0 && t != 1.0) {
        return Err(Error::InvalidArgument(format!("binary target {t} is not 0 or 1")));
    }
    Ok(())
}

/// Mean binary cross-entropy of `sigmoid(logits)` against 0/1 targets, in the
/// overflow-free form `max(l, 0) − l·t + ln(1 + e^{−|l|})`.
pub fn bce_logits(logits: &Tensor, targets: &Tensor) -> Result<f64> {
    check_binary_targets(logits, targets)?;
    let total: f64 = logits
        .data()
        .iter()
        .zip(targets.data())
        .map(|(&l, &t)| softplus(if t == 1.0 { -l } else { l }))
        .sum();
    Ok(total / logits.len() as f64)
}

pub(crate) fn bce_logits_grad(logits: &Tensor, targets: &Tensor) -> Tensor {
    let n = logits.len() as f64;
    let mut g = logits.clone();
    g.data_mut()
        .iter_mut()
        .zip(targets.data())
        .for_each(|(l, t)| *l = (sigmoid(*l) - t) / n);
    g
}

fn check_class_labels(logits: &Tensor, labels: &[usize]) -> Result<(usize, usize)> {
    let [batch, classes] = logits.dims2("softmax logits")?;
    if labels.len() != batch {
        return Err(Error::Shape(format!("{batch} logit rows but {} labels", labels.len())));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::LabelOutOfRange { label, classes });
    }
    Ok((batch, classes))
}

fn log_softmax_row(row: &[f64], out: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + libm::log(row.iter().map(|v| libm::exp(v - max)).sum::<f64>());
    out.iter_mut().zip(row).for_each(|(o, v)| *o = v - lse);
}

/// Mean negative log softmax probability of the true class.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<f64> {
    let (batch, classes) = check_class_labels(logits, labels)?;
    let mut buf = vec![0.0; classes];
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            log_softmax_row(logits.row(i), &mut buf);
            -buf[y]
        })
        .sum();
    Ok(total / batch as f64)
}

pub(crate) fn softmax_cross_entropy_grad(logits: &Tensor, labels: &[usize]) -> Tensor {
    let classes = logits.shape()[1];
    let batch = labels.len() as f64;
    let mut g = logits.clone();
    for (row, &y) in g.data_mut().chunks_mut(classes).zip(labels) {
        let src: Vec<f64> = row.to_vec();
        log_softmax_row(&src, row);
        row.iter_mut().for_each(|v| *v = libm::exp(*v) / batch);
        row[y] -= 1.0 / batch;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_of_ones_sums_each_window() {
        let x = Tensor::full(&[1, 1, 3, 3], 1.0);
        let w = Tensor::full(&[1, 1, 2, 2], 1.0);
        let y = conv2d(&x, &w, &Tensor::zeros(&[1]), (1, 1), (0, 0)).unwrap();
        assert_eq!(y.shape(), &[1, 1, 2, 2]);
        assert!(y.data().iter().all(|&v| v == 4.0));
    }

    #[test]
    fn unit_kernel_is_identity() {
        let x = Tensor::from_fn(&[2, 1, 3, 4], |i| i as f64 - 5.0);
        let w = Tensor::full(&[1, 1, 1, 1], 1.0);
        let y = conv2d(&x, &w, &Tensor::zeros(&[1]), (1, 1), (0, 0)).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn zero_kernel_gives_bias() {
        let x = Tensor::from_fn(&[1, 2, 4, 4], |i| i as f64);
        let w = Tensor::zeros(&[3, 2, 3, 3]);
        let b = Tensor::new(vec![3], vec![0.5, -1.0, 2.0]).unwrap();
        let y = conv2d(&x, &w, &b, (1, 1), (1, 1)).unwrap();
        for (c, plane) in y.data().chunks(16).enumerate() {
            assert!(plane.iter().all(|&v| v == b.data()[c]));
        }
    }

    #[test]
    fn conv_shape_errors_name_axes() {
        let x = Tensor::zeros(&[1, 2, 4, 4]);
        let w = Tensor::zeros(&[1, 3, 2, 2]);
        let err = conv2d(&x, &w, &Tensor::zeros(&[1]), (1, 1), (0, 0)).unwrap_err();
        assert!(matches!(err, Error::Shape(ref m) if m.contains("in_channels")));
        let w = Tensor::zeros(&[1, 2, 6, 2]);
        assert!(conv2d(&x, &w, &Tensor::zeros(&[1]), (1, 1), (0, 0)).is_err());
    }

    #[test]
    fn output_size_formula() {
        let x = Tensor::zeros(&[1, 1, 9, 64]);
        let w = Tensor::zeros(&[4, 1, 3, 4]);
        let y = conv2d(&x, &w, &Tensor::zeros(&[4]), (1, 2), (1, 1)).unwrap();
        // floor((9 + 2 - 3)/1) + 1 = 9, floor((64 + 2 - 4)/2) + 1 = 32
        assert_eq!(y.shape(), &[1, 4, 9, 32]);
    }

    #[test]
    fn stride_two_transpose_spreads_single_value() {
        let x = Tensor::full(&[1, 1, 1, 1], 3.5);
        let w = Tensor::full(&[1, 1, 2, 2], 1.0);
        let y = conv2d_transpose(&x, &w, &Tensor::zeros(&[1]), (2, 2), (0, 0)).unwrap();
        assert_eq!(y.shape(), &[1, 1, 2, 2]);
        assert!(y.data().iter().all(|&v| v == 3.5));
    }

    #[test]
    fn transpose_of_zero_is_bias() {
        let x = Tensor::zeros(&[2, 3, 2, 3]);
        let w = Tensor::from_fn(&[3, 2, 3, 4], |i| i as f64);
        let b = Tensor::new(vec![2], vec![0.25, -4.0]).unwrap();
        let y = conv2d_transpose(&x, &w, &b, (1, 2), (0, 1)).unwrap();
        assert_eq!(y.shape(), &[2, 2, 4, 6]);
        for (i, plane) in y.data().chunks(24).enumerate() {
            assert!(plane.iter().all(|&v| v == b.data()[i % 2]));
        }
    }

    #[test]
    fn dense_arithmetic() {
        let x = Tensor::new(vec![1, 2], vec![1.0, 2.0]).unwrap();
        let w = Tensor::new(vec![2, 2], vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        let b = Tensor::new(vec![2], vec![0.5, 0.0]).unwrap();
        assert_eq!(dense(&x, &w, &b).unwrap().data(), &[3.5, 2.0]);

        let eye = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(dense(&x, &eye, &Tensor::zeros(&[2])).unwrap(), x);

        let zeros = Tensor::zeros(&[3, 2]);
        let y = dense(&zeros, &w, &b).unwrap();
        assert!(y.data().chunks(2).all(|r| r == b.data()));
    }

    #[test]
    fn activations() {
        let x = Tensor::new(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(activation(&x, Activation::Relu).data(), &[0.0, 0.0, 2.0]);
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.5);
        assert_eq!(Activation::LeakyRelu(0.2).apply(-5.0), -1.0);
        assert_eq!(Activation::Tanh.apply(0.0), 0.0);
        assert!(Activation::Sigmoid.apply(-800.0).is_finite());
    }

    #[test]
    fn pooling_takes_first_of_ties() {
        let x = Tensor::new(vec![1, 1, 2, 4], vec![1.0, 1.0, 0.0, 2.0, 1.0, 0.0, 2.0, 0.0]).unwrap();
        let (y, idx) = max_pool2d_indexed(&x, (2, 2)).unwrap();
        assert_eq!(y.data(), &[1.0, 2.0]);
        assert_eq!(idx, vec![0, 3]);
        let (y, _) = max_pool2d_indexed(&Tensor::zeros(&[1, 1, 3, 5]), (1, 2)).unwrap();
        assert_eq!(y.shape(), &[1, 1, 3, 2]);
    }

    #[test]
    fn bce_values() {
        let t1 = Tensor::scalar(1.0);
        assert!((bce_logits(&Tensor::scalar(0.0), &t1).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        let saturated = bce_logits(&Tensor::scalar(40.0), &t1).unwrap();
        assert!((0.0..1e-15).contains(&saturated));
        assert!(bce_logits(&Tensor::scalar(-1e300), &t1).unwrap().is_finite());
        assert!(bce_logits(&Tensor::scalar(0.0), &Tensor::scalar(0.5)).is_err());
    }

    #[test]
    fn softmax_values() {
        let uniform = Tensor::zeros(&[3, 2]);
        let l = softmax_cross_entropy(&uniform, &[0, 1, 1]).unwrap();
        assert!((l - core::f64::consts::LN_2).abs() < 1e-15);
        let sat = Tensor::new(vec![1, 2], vec![10.0, -10.0]).unwrap();
        assert!(softmax_cross_entropy(&sat, &[0]).unwrap() < 1e-8);
        assert_eq!(
            softmax_cross_entropy(&sat, &[2]),
            Err(Error::LabelOutOfRange { label: 2, classes: 2 })
        );
    }
}
