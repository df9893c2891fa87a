/// Least-squares projection onto non-decreasing sequences (pool adjacent violators).
pub fn pool_adjacent_violators(values: &[f64]) -> Vec<f64> {
    // (block mean, block length)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        let mut mean = v;
        let mut len = 1usize;
        while let Some(&(prev_mean, prev_len)) = blocks.last() {
            if prev_mean <= mean {
                break;
            }
            blocks.pop();
            mean = (prev_mean * prev_len as f64 + mean * len as f64) / (prev_len + len) as f64;
            len += prev_len;
        }
        blocks.push((mean, len));
    }
    blocks.into_iter().flat_map(|(mean, len)| std::iter::repeat(mean).take(len)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(pool_adjacent_violators(&[1.0, 2.0, 2.0, 5.0]), vec![1.0, 2.0, 2.0, 5.0]);
        assert_eq!(pool_adjacent_violators(&[1.0, 3.0, 2.0]), vec![1.0, 2.5, 2.5]);
        assert_eq!(pool_adjacent_violators(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
        assert!(pool_adjacent_violators(&[]).is_empty());
    }

    #[test]
    fn cascading_merge() {
        assert_eq!(pool_adjacent_violators(&[4.0, 5.0, 1.0, 6.0]), vec![10.0 / 3.0, 10.0 / 3.0, 10.0 / 3.0, 6.0]);
    }
}
