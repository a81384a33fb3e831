use alloc::vec::Vec;

use rand::Rng;

use super::scalar::Scalar;
use super::NnError;

/// A dense 2-D value: `rows * cols` elements in row-major order, plus an
/// optional same-shape gradient buffer filled in by the tape after a
/// backward pass. Scalars are `1x1`, row vectors `1xn`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
    grad: Option<Vec<S>>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: alloc::vec![S::zero(); rows * cols],
            grad: None,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self, NnError> {
        if data.len() != rows * cols {
            return Err(NnError::ShapeMismatch {
                context: "Tensor::from_vec",
                detail: alloc::format!(
                    "{rows}x{cols} needs {} elements, got {}",
                    rows * cols,
                    data.len()
                ),
            });
        }
        Ok(Tensor {
            rows,
            cols,
            data,
            grad: None,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Tensor {
            rows,
            cols,
            data,
            grad: None,
        }
    }

    pub fn scalar(v: S) -> Self {
        Tensor {
            rows: 1,
            cols: 1,
            data: alloc::vec![v],
            grad: None,
        }
    }

    pub fn row(data: Vec<S>) -> Self {
        Tensor {
            rows: 1,
            cols: data.len(),
            data,
            grad: None,
        }
    }

    pub fn column(data: Vec<S>) -> Self {
        Tensor {
            rows: data.len(),
            cols: 1,
            data,
            grad: None,
        }
    }

    /// Fan-in-scaled uniform initialization, `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn uniform_fan_in(rows: usize, cols: usize, fan_in: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / num_traits::Float::sqrt(fan_in.max(1) as f64);
        Tensor::from_fn(rows, cols, |_, _| {
            S::from_f64(rng.random_range(-bound..bound))
        })
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.rows, self.cols]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn grad(&self) -> Option<&[S]> {
        self.grad.as_deref()
    }

    pub fn set_grad(&mut self, grad: Vec<S>) {
        debug_assert_eq!(grad.len(), self.data.len());
        self.grad = Some(grad);
    }

    pub fn clear_grad(&mut self) {
        self.grad = None;
    }

    /// Element-wise cast; used to lift `f32` parameters into the `f64`
    /// gradient-check path.
    pub fn cast<T: Scalar>(&self) -> Tensor<T> {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| T::from_f64(x.as_f64())).collect(),
            grad: None,
        }
    }
}
