//! Finite alphabets and dense probability tables.
//!
//! Every constructor validates its input and rejects non-stochastic data
//! instead of renormalizing it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for a single row or pmf to sum to one.
pub const ROW_TOL: f64 = 1e-12;
/// Tolerance for a joint table to sum to one.
pub const JOINT_TOL: f64 = 1e-10;
/// Largest alphabet the dense representation is meant for.
pub const MAX_ALPHABET: usize = 16;

/// A finite alphabet with symbols `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    name: String,
    size: usize,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, size: usize) -> Result<Self> {
        let name = name.into();
        if size == 0 {
            return Err(Error::InvalidParameter(format!(
                "alphabet `{name}` must have at least one symbol"
            )));
        }
        Ok(Self { name, size })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn symbols(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    fn check_symbol(&self, symbol: usize) -> Result<()> {
        if symbol < self.size {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch(format!(
                "symbol {symbol} outside alphabet `{}` of size {}",
                self.name, self.size
            )))
        }
    }
}

fn check_nonnegative(what: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        Some(index) => Err(Error::NegativeProbability {
            what: what.to_string(),
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// A probability mass function on an alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    support: Alphabet,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(support: Alphabet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != support.size() {
            return Err(Error::AlphabetMismatch(format!(
                "pmf over `{}` needs {} entries, got {}",
                support.name(),
                support.size(),
                probs.len()
            )));
        }
        let what = format!("pmf over `{}`", support.name());
        check_nonnegative(&what, &probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_TOL {
            return Err(Error::NotStochastic { what, row: 0, sum });
        }
        Ok(Self { support, probs })
    }

    pub fn point_mass(support: Alphabet, symbol: usize) -> Result<Self> {
        support.check_symbol(symbol)?;
        let mut probs = vec![0.0; support.size()];
        probs[symbol] = 1.0;
        Ok(Self { support, probs })
    }

    pub fn uniform(support: Alphabet) -> Self {
        let n = support.size();
        Self {
            support,
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Bernoulli(p) on a binary alphabet.
    pub fn bernoulli(support: Alphabet, p: f64) -> Result<Self> {
        if support.size() != 2 {
            return Err(Error::AlphabetMismatch(format!(
                "Bernoulli pmf needs a binary alphabet, `{}` has {} symbols",
                support.name(),
                support.size()
            )));
        }
        Self::new(support, vec![1.0 - p, p])
    }

    pub fn support(&self) -> &Alphabet {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &Pmf, alpha: f64) -> Result<Pmf> {
        if self.support != other.support {
            return Err(Error::AlphabetMismatch("mixing pmfs on different alphabets".into()));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        Pmf::new(self.support.clone(), probs)
    }
}

/// A row-stochastic conditional law from a tuple of input alphabets to an
/// output alphabet. Rows are stored in row-major order over the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondKernel {
    inputs: Vec<Alphabet>,
    output: Alphabet,
    table: Vec<f64>,
}

impl CondKernel {
    pub fn new(inputs: Vec<Alphabet>, output: Alphabet, table: Vec<f64>) -> Result<Self> {
        let rows: usize = inputs.iter().map(Alphabet::size).product();
        let width = output.size();
        if table.len() != rows * width {
            return Err(Error::AlphabetMismatch(format!(
                "kernel to `{}` needs {} x {} entries, got {}",
                output.name(),
                rows,
                width,
                table.len()
            )));
        }
        let what = format!(
            "kernel ({}) -> {}",
            inputs.iter().map(Alphabet::name).collect::<Vec<_>>().join(","),
            output.name()
        );
        check_nonnegative(&what, &table)?;
        for (row, chunk) in table.chunks(width).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > ROW_TOL {
                return Err(Error::NotStochastic { what, row, sum });
            }
        }
        Ok(Self {
            inputs,
            output,
            table,
        })
    }

    /// Builds a kernel from a function of (input tuple, output symbol).
    pub fn from_fn(
        inputs: Vec<Alphabet>,
        output: Alphabet,
        mut f: impl FnMut(&[usize], usize) -> f64,
    ) -> Result<Self> {
        let mut table = Vec::new();
        let sizes: Vec<usize> = inputs.iter().map(Alphabet::size).collect();
        for idx in MixedRadix::new(&sizes) {
            for o in 0..output.size() {
                table.push(f(&idx, o));
            }
        }
        Self::new(inputs, output, table)
    }

    /// The deterministic kernel `output = map(inputs)`.
    pub fn deterministic(
        inputs: Vec<Alphabet>,
        output: Alphabet,
        mut map: impl FnMut(&[usize]) -> usize,
    ) -> Result<Self> {
        Self::from_fn(inputs, output, |idx, o| if map(idx) == o { 1.0 } else { 0.0 })
    }

    pub fn inputs(&self) -> &[Alphabet] {
        &self.inputs
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn n_rows(&self) -> usize {
        self.table.len() / self.output.size()
    }

    pub fn row_index(&self, input: &[usize]) -> usize {
        debug_assert_eq!(input.len(), self.inputs.len());
        input
            .iter()
            .zip(&self.inputs)
            .fold(0, |acc, (&i, a)| acc * a.size() + i)
    }

    pub fn row(&self, input: &[usize]) -> &[f64] {
        let w = self.output.size();
        let r = self.row_index(input);
        &self.table[r * w..(r + 1) * w]
    }

    pub fn row_at(&self, row: usize) -> &[f64] {
        let w = self.output.size();
        &self.table[row * w..(row + 1) * w]
    }

    pub fn prob(&self, input: &[usize], output: usize) -> f64 {
        self.row(input)[output]
    }

    /// Same kernel with only the listed rows of a single-input kernel kept.
    pub fn restrict_inputs(&self, keep: &[usize]) -> Result<CondKernel> {
        if self.inputs.len() != 1 {
            return Err(Error::InvalidParameter(
                "input restriction needs a single-input kernel".into(),
            ));
        }
        let name = format!("{}'", self.inputs[0].name());
        let inputs = vec![Alphabet::new(name, keep.len())?];
        let mut table = Vec::with_capacity(keep.len() * self.output.size());
        for &x in keep {
            self.inputs[0].check_symbol(x)?;
            table.extend_from_slice(self.row_at(x));
        }
        CondKernel::new(inputs, self.output.clone(), table)
    }
}

/// Iterator over all tuples of a mixed-radix index space, last digit fastest.
#[derive(Debug, Clone)]
pub struct MixedRadix {
    sizes: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl MixedRadix {
    pub fn new(sizes: &[usize]) -> Self {
        Self {
            sizes: sizes.to_vec(),
            current: vec![0; sizes.len()],
            done: sizes.contains(&0),
        }
    }
}

impl Iterator for MixedRadix {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut k = self.sizes.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.current[k] += 1;
            if self.current[k] < self.sizes[k] {
                break;
            }
            self.current[k] = 0;
        }
        Some(out)
    }
}

/// A dense joint pmf over an ordered tuple of named finite variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    names: Vec<String>,
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl JointTable {
    pub fn new(names: Vec<String>, dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let table = Self::unchecked(names, dims, data)?;
        check_nonnegative("joint table", &table.data)?;
        let sum: f64 = table.data.iter().sum();
        if (sum - 1.0).abs() > JOINT_TOL {
            return Err(Error::NotStochastic {
                what: format!("joint table over ({})", table.names.join(",")),
                row: 0,
                sum,
            });
        }
        Ok(table)
    }

    /// Structural checks only; used internally by optimizers that evaluate
    /// tables whose mass is exact by construction.
    pub(crate) fn unchecked(names: Vec<String>, dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if names.len() != dims.len() {
            return Err(Error::InvalidParameter("names and dims differ in length".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidParameter(format!("duplicate variable `{n}`")));
            }
        }
        let cells: usize = dims.iter().product();
        if cells != data.len() {
            return Err(Error::AlphabetMismatch(format!(
                "joint table needs {cells} cells, got {}",
                data.len()
            )));
        }
        Ok(Self { names, dims, data })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn axis(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn dim(&self, name: &str) -> Result<usize> {
        Ok(self.dims[self.axis(name)?])
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let strides = self.strides();
        self.data[index.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Marginal over the named variables, in the given order.
    pub fn marginal(&self, vars: &[&str]) -> Result<JointTable> {
        let axes = vars
            .iter()
            .map(|v| self.axis(v))
            .collect::<Result<Vec<_>>>()?;
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].contains(a) {
                return Err(Error::InvalidParameter(format!(
                    "variable `{}` listed twice",
                    self.names[*a]
                )));
            }
        }
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out_strides = vec![1; axes.len()];
        for k in (0..axes.len().saturating_sub(1)).rev() {
            out_strides[k] = out_strides[k + 1] * out_dims[k + 1];
        }
        let mut out = vec![0.0; out_dims.iter().product()];
        let mut idx = vec![0usize; self.dims.len()];
        for &p in &self.data {
            let target: usize = axes
                .iter()
                .zip(&out_strides)
                .map(|(&a, s)| idx[a] * s)
                .sum();
            out[target] += p;
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(JointTable {
            names: vars.iter().map(|s| s.to_string()).collect(),
            dims: out_dims,
            data: out,
        })
    }

    /// Conditional table given `var = value`, with `var` removed.
    pub fn slice(&self, var: &str, value: usize) -> Result<JointTable> {
        let axis = self.axis(var)?;
        if value >= self.dims[axis] {
            return Err(Error::AlphabetMismatch(format!(
                "value {value} outside `{var}` of size {}",
                self.dims[axis]
            )));
        }
        let strides = self.strides();
        let mut names = self.names.clone();
        let mut dims = self.dims.clone();
        names.remove(axis);
        dims.remove(axis);
        let mut data = Vec::with_capacity(self.data.len() / self.dims[axis]);
        for (flat, &p) in self.data.iter().enumerate() {
            if (flat / strides[axis]) % self.dims[axis] == value {
                data.push(p);
            }
        }
        let mass: f64 = data.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroMassSlice {
                var: var.to_string(),
                value,
            });
        }
        data.iter_mut().for_each(|p| *p /= mass);
        Ok(JointTable { names, dims, data })
    }

    /// Table with an extra variable appended, distributed by a kernel whose
    /// inputs are existing variables of this table.
    pub fn extend(&self, name: &str, parents: &[&str], kernel: &CondKernel) -> Result<JointTable> {
        if self.names.iter().any(|n| n == name) {
            return Err(Error::InvalidParameter(format!("variable `{name}` already present")));
        }
        let axes = parents
            .iter()
            .map(|v| self.axis(v))
            .collect::<Result<Vec<_>>>()?;
        if axes.len() != kernel.inputs().len()
            || axes
                .iter()
                .zip(kernel.inputs())
                .any(|(&a, alpha)| self.dims[a] != alpha.size())
        {
            return Err(Error::AlphabetMismatch(format!(
                "kernel inputs do not match parents ({})",
                parents.join(",")
            )));
        }
        let width = kernel.output().size();
        let mut data = Vec::with_capacity(self.data.len() * width);
        let mut idx = vec![0usize; self.dims.len()];
        let mut parent_idx = vec![0usize; axes.len()];
        for &p in &self.data {
            for (slot, &a) in parent_idx.iter_mut().zip(&axes) {
                *slot = idx[a];
            }
            for &q in kernel.row(&parent_idx) {
                data.push(p * q);
            }
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        let mut names = self.names.clone();
        names.push(name.to_string());
        let mut dims = self.dims.clone();
        dims.push(width);
        Ok(JointTable { names, dims, data })
    }
}
