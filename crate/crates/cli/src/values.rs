//! Sweep value lists: `start..end:step` ranges or comma-separated lists.

#[derive(Debug, Clone, PartialEq)]
pub struct Values(pub Vec<f64>);

const MAX_POINTS: usize = 10_000;

pub fn parse_values(s: &str) -> Result<Values, String> {
    let s = s.trim();
    let number = |t: &str| -> Result<f64, String> {
        let v: f64 = t
            .trim()
            .parse()
            .map_err(|_| format!("`{t}` is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{t}` is not finite"))
        }
    };
    if let Some((range, step)) = s.split_once(':') {
        let (start, end) = range
            .split_once("..")
            .ok_or_else(|| format!("expected `start..end:step`, got `{s}`"))?;
        let (start, end, step) = (number(start)?, number(end)?, number(step)?);
        if step <= 0.0 || end < start {
            return Err(format!("empty or descending range `{s}`"));
        }
        // tolerate float noise so that 0.1..1.0:0.1 includes 1.0
        let n = ((end - start) / step + 1e-9).floor() as usize + 1;
        if n > MAX_POINTS {
            return Err(format!("range `{s}` has more than {MAX_POINTS} points"));
        }
        let values = (0..n)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect();
        return Ok(Values(values));
    }
    let values = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
    Ok(Values(values))
}
