/// Row-major indexing of action profiles over `(A_1, ..., A_n)`; the last
/// player's action varies fastest. Opponent profiles `A_{-i}` use the same
/// convention over the remaining players in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSpace {
    dims: Vec<usize>,
    /// `strides[i] = prod_{j > i} dims[j]`
    strides: Vec<usize>,
    size: usize,
}

impl ProfileSpace {
    pub fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        ProfileSpace {
            dims: dims.to_vec(),
            strides,
            size: dims.iter().product(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn players(&self) -> usize {
        self.dims.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `|A_{-i}|`
    pub fn opponent_size(&self, i: usize) -> usize {
        self.size / self.dims[i]
    }

    /// `prod_{j > i} |A_j|`.
    pub fn stride(&self, i: usize) -> usize {
        self.strides[i]
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn profile(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (k, &s) in self.strides.iter().enumerate() {
            out[k] = index / s;
            index %= s;
        }
        out
    }

    pub fn action(&self, i: usize, index: usize) -> usize {
        (index / self.strides[i]) % self.dims[i]
    }

    /// Splits a profile index into `(a_i, opponent index)`.
    pub fn split(&self, i: usize, index: usize) -> (usize, usize) {
        let s = self.strides[i];
        let high = index / (s * self.dims[i]);
        let low = index % s;
        ((index / s) % self.dims[i], high * s + low)
    }

    /// Inverse of [`split`](Self::split).
    pub fn join(&self, i: usize, action: usize, opponent: usize) -> usize {
        let s = self.strides[i];
        let high = opponent / s;
        let low = opponent % s;
        high * s * self.dims[i] + action * s + low
    }

    /// Opponent profile space for player `i`.
    pub fn opponents(&self, i: usize) -> ProfileSpace {
        let dims: Vec<usize> = self
            .dims
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &d)| d)
            .collect();
        ProfileSpace::new(&dims)
    }
}
