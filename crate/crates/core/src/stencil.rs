//! Fourth-order periodic central differences.
//!
//! The first-derivative stencil is antisymmetric and the second-derivative
//! stencil symmetric, so on a periodic grid Σ f·(Dg) = −Σ (Df)·g and
//! Σ f·(Lg) = Σ (Lf)·g hold to rounding. The functional-derivative code
//! in [`crate::consistency`] and the quantum potential rely on both.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::grid::GridSpec;

/// Values a stencil can act on.
pub trait FieldValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
}

impl FieldValue for f64 {}
impl FieldValue for Complex64 {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn from_int(order: u8) -> Option<Self> {
        match order {
            1 => Some(Order::First),
            2 => Some(Order::Second),
            _ => None,
        }
    }
}

/// Apply the fourth-order central difference of the given order along `axis`.
pub fn spatial_derivative<T: FieldValue>(
    field: &[T],
    grid: &GridSpec,
    axis: usize,
    order: Order,
) -> Vec<T> {
    assert!(axis < grid.ndim(), "axis {axis} out of range");
    assert_eq!(field.len(), grid.len(), "field length does not match grid");
    let mut out = field.to_vec();
    apply_into(field, grid, axis, order, &mut out);
    out
}

/// ∂f/∂x_axis.
pub fn d1<T: FieldValue>(field: &[T], grid: &GridSpec, axis: usize) -> Vec<T> {
    spatial_derivative(field, grid, axis, Order::First)
}

/// ∂²f/∂x_axis².
pub fn d2<T: FieldValue>(field: &[T], grid: &GridSpec, axis: usize) -> Vec<T> {
    spatial_derivative(field, grid, axis, Order::Second)
}

fn apply_into<T: FieldValue>(field: &[T], grid: &GridSpec, axis: usize, order: Order, out: &mut [T]) {
    let n = grid.dim(axis).n_points;
    let stride = grid.stride(axis);
    let block = n * stride;
    let h = grid.spacing(axis);
    let (scale, kind) = match order {
        Order::First => (1.0 / (12.0 * h), Order::First),
        Order::Second => (1.0 / (12.0 * h * h), Order::Second),
    };
    for base in (0..field.len()).step_by(block) {
        for inner in 0..stride {
            let at = |i: usize| field[base + (i % n) * stride + inner];
            for i in 0..n {
                let f0 = at(i);
                let fp1 = at(i + 1);
                let fp2 = at(i + 2);
                let fm1 = at(i + n - 1);
                let fm2 = at(i + n - 2);
                // Written as differences so constants map to exactly zero.
                let v = match kind {
                    Order::First => (fp1 - fm1) * 8.0 - (fp2 - fm2),
                    Order::Second => {
                        (fp1 - f0) * 16.0 + (fm1 - f0) * 16.0 - (fp2 - f0) - (fm2 - f0)
                    }
                };
                out[base + i * stride + inner] = v * scale;
            }
        }
    }
}

/// Σ over axes of the second derivative.
pub fn laplacian<T: FieldValue>(field: &[T], grid: &GridSpec) -> Vec<T> {
    let mut acc = d2(field, grid, 0);
    for axis in 1..grid.ndim() {
        for (a, b) in acc.iter_mut().zip(d2(field, grid, axis)) {
            *a = *a + b;
        }
    }
    acc
}
