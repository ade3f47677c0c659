use std::sync::Arc;

use crate::error::{invalid, Result};

/// Bijection on `0..len`, stored either as a table or in closed form.
#[derive(Clone, Debug)]
pub enum PermutationMap {
    /// `image[i]` is where basis vector `i` is sent.
    Table { image: Arc<[usize]> },
    /// `i -> (i + shift) mod len`.
    Cyclic { len: usize, shift: usize },
    /// Mixed-radix digit reordering. Input digit `p` has radix `radices[p]`
    /// (most significant first); output position `q` holds input digit
    /// `order[q]`.
    Reorder {
        radices: Arc<[usize]>,
        order: Arc<[usize]>,
    },
}

impl PermutationMap {
    pub fn table(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &j in &image {
            if j >= n || seen[j] {
                return Err(invalid("permutation", format!("image {j} is out of range or repeated")));
            }
            seen[j] = true;
        }
        Ok(PermutationMap::Table {
            image: image.into(),
        })
    }

    pub fn cyclic(len: usize, shift: i64) -> Self {
        let shift = if len == 0 {
            0
        } else {
            shift.rem_euclid(len as i64) as usize
        };
        PermutationMap::Cyclic { len, shift }
    }

    pub fn reorder(radices: &[usize], order: &[usize]) -> Result<Self> {
        if radices.len() != order.len() {
            return Err(invalid("order", "length differs from radices"));
        }
        let mut seen = vec![false; order.len()];
        for &p in order {
            if p >= order.len() || seen[p] {
                return Err(invalid("order", "not a permutation of digit positions"));
            }
            seen[p] = true;
        }
        if radices.iter().any(|&r| r == 0) {
            return Err(invalid("radices", "zero radix"));
        }
        Ok(PermutationMap::Reorder {
            radices: radices.into(),
            order: order.into(),
        })
    }

    pub fn len(&self) -> usize {
        match self {
            PermutationMap::Table { image } => image.len(),
            PermutationMap::Cyclic { len, .. } => *len,
            PermutationMap::Reorder { radices, .. } => radices.iter().product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn image(&self, i: usize) -> usize {
        match self {
            PermutationMap::Table { image } => image[i],
            PermutationMap::Cyclic { len, shift } => (i + shift) % len,
            PermutationMap::Reorder { radices, order } => {
                let strides = reorder_strides(radices, order);
                let mut rest = i;
                let mut out = 0;
                for p in (0..radices.len()).rev() {
                    out += (rest % radices[p]) * strides[p];
                    rest /= radices[p];
                }
                out
            }
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            PermutationMap::Table { image } => {
                let mut inv = vec![0; image.len()];
                for (i, &j) in image.iter().enumerate() {
                    inv[j] = i;
                }
                PermutationMap::Table { image: inv.into() }
            }
            PermutationMap::Cyclic { len, shift } => PermutationMap::Cyclic {
                len: *len,
                shift: (len - shift) % len.max(&1),
            },
            PermutationMap::Reorder { radices, order } => {
                let new_radices: Vec<usize> = order.iter().map(|&p| radices[p]).collect();
                let mut inv = vec![0; order.len()];
                for (q, &p) in order.iter().enumerate() {
                    inv[p] = q;
                }
                PermutationMap::Reorder {
                    radices: new_radices.into(),
                    order: inv.into(),
                }
            }
        }
    }

    /// Calls `f(i, image(i))` for every `i` in increasing order.
    pub fn for_each_image(&self, mut f: impl FnMut(usize, usize)) {
        match self {
            PermutationMap::Table { image } => {
                for (i, &j) in image.iter().enumerate() {
                    f(i, j);
                }
            }
            PermutationMap::Cyclic { len, shift } => {
                for i in 0..*len {
                    let j = i + shift;
                    f(i, if j >= *len { j - len } else { j });
                }
            }
            PermutationMap::Reorder { radices, order } => {
                let strides = reorder_strides(radices, order);
                let k = radices.len();
                let mut digits = vec![0usize; k];
                let mut img = 0usize;
                let total = self.len();
                for i in 0..total {
                    f(i, img);
                    // odometer increment, least significant digit last
                    let mut p = k;
                    while p > 0 {
                        p -= 1;
                        digits[p] += 1;
                        img += strides[p];
                        if digits[p] < radices[p] {
                            break;
                        }
                        img -= strides[p] * radices[p];
                        digits[p] = 0;
                    }
                }
            }
        }
    }
}

/// Output stride of each input digit position.
fn reorder_strides(radices: &[usize], order: &[usize]) -> Vec<usize> {
    let k = radices.len();
    let mut strides = vec![0; k];
    let mut acc = 1;
    for q in (0..k).rev() {
        let p = order[q];
        strides[p] = acc;
        acc *= radices[p];
    }
    strides
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(map: &PermutationMap) -> Vec<usize> {
        let mut out = vec![0; map.len()];
        map.for_each_image(|i, j| out[i] = j);
        out
    }

    #[test]
    fn table_rejects_non_bijection() {
        assert!(PermutationMap::table(vec![0, 0, 1]).is_err());
        assert!(PermutationMap::table(vec![0, 3]).is_err());
    }

    #[test]
    fn reorder_matches_pointwise_image() {
        let map = PermutationMap::reorder(&[2, 3, 4], &[2, 0, 1]).unwrap();
        let walked = collect(&map);
        for (i, &j) in walked.iter().enumerate() {
            assert_eq!(map.image(i), j);
        }
        // digits (a, b, c) -> (c, a, b)
        let (a, b, c) = (1, 2, 3);
        let i = (a * 3 + b) * 4 + c;
        assert_eq!(map.image(i), (c * 2 + a) * 3 + b);
    }

    #[test]
    fn inverses_compose_to_identity() {
        let maps = [
            PermutationMap::cyclic(8, -3),
            PermutationMap::reorder(&[2, 5, 3], &[1, 2, 0]).unwrap(),
            PermutationMap::table(vec![2, 0, 3, 1]).unwrap(),
        ];
        for m in maps {
            let inv = m.inverse();
            for i in 0..m.len() {
                assert_eq!(inv.image(m.image(i)), i);
            }
        }
    }
}
