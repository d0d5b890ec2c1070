//! Time-grid descriptors: `geom:a:b:n`, `lin:a:b:n`, or a comma list.

use fraclrd::estimate::geometric_grid;

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    let grid = if let Some(rest) = spec.strip_prefix("geom:") {
        let (a, b, n) = range_parts(rest, spec)?;
        geometric_grid(a, b, n).map_err(|e| format!("bad grid '{spec}': {e}"))?
    } else if let Some(rest) = spec.strip_prefix("lin:") {
        let (a, b, n) = range_parts(rest, spec)?;
        if !(a.is_finite() && b > a && b.is_finite()) || n < 2 {
            return Err(format!("bad grid '{spec}': need start < stop and count >= 2"));
        }
        let last = (n - 1) as f64;
        (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / last }).collect()
    } else {
        spec.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad grid '{spec}': '{x}' is not a number")))
            .collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return Err(format!("grid '{spec}' is empty"));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(format!("grid '{spec}' must contain finite times >= 0"));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(format!("grid '{spec}' must be strictly increasing"));
    }
    Ok(grid)
}

fn range_parts(rest: &str, spec: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("bad grid '{spec}': expected <kind>:<start>:<stop>:<count>"));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad grid '{spec}': '{s}' is not a number"));
    let count = parts[2].trim().parse::<usize>().map_err(|_| format!("bad grid '{spec}': '{}' is not a count", parts[2]))?;
    Ok((num(parts[0])?, num(parts[1])?, count))
}

pub fn parse_int_list(spec: &str) -> Result<Vec<u64>, String> {
    let v = spec
        .split(',')
        .map(|x| {
            let x = x.trim();
            // accept 1e4-style input as long as it is an exact integer
            x.parse::<u64>().or_else(|_| match x.parse::<f64>() {
                Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < 1e18 => Ok(f as u64),
                _ => Err(format!("'{x}' is not a nonnegative integer")),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("list is empty".into());
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric() {
        let g = parse_grid("geom:100:1e6:25").unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 100.0);
        assert_eq!(g[24], 1e6);
    }

    #[test]
    fn linear_and_lists() {
        assert_eq!(parse_grid("lin:1:3:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("1, 5,10").unwrap(), vec![1.0, 5.0, 10.0]);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(parse_grid("geom:0:10:5").is_err());
        assert!(parse_grid("lin:1:3").is_err());
        assert!(parse_grid("3,2").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("-1,2").is_err());
    }

    #[test]
    fn int_lists() {
        assert_eq!(parse_int_list("10,100,1e3").unwrap(), vec![10, 100, 1000]);
        assert!(parse_int_list("1.5").is_err());
    }
}
