//! Binary file formats, CSV export and PGM rendering.
//!
//! Binary files start with a magic line and a dimension line in ASCII, followed
//! by little-endian `f64` `(re, im)` pairs.

use crate::error::{Error, Result};
use crate::grid::{
    BoundaryField, CoeffTable, DiskImage, ImageGrid, SinoGrid, Sinogram, TensorField,
};
use crate::C64;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const SINO_MAGIC: &str = "FBSG1";
const IMAGE_MAGIC: &str = "DIMG1";
const TENSOR_MAGIC: &str = "TFLD1";

fn format_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn line(&mut self) -> Result<&'a str> {
        let rest = &self.buf[self.pos..];
        let Some(end) = rest.iter().take(256).position(|&c| c == b'\n') else {
            return format_err("missing header line");
        };
        self.pos += end + 1;
        std::str::from_utf8(&rest[..end])
            .map(str::trim)
            .map_err(|_| Error::Format("header line is not ASCII".into()))
    }

    fn complex_values(&mut self, n: usize) -> Result<Vec<C64>> {
        let need = n
            .checked_mul(16)
            .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
        let rest = &self.buf[self.pos..];
        if rest.len() < need {
            return format_err(format!(
                "payload too short: expected {need} bytes, found {}",
                rest.len()
            ));
        }
        let vals = rest[..need]
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                C64::new(re, im)
            })
            .collect();
        self.pos += need;
        Ok(vals)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return format_err(format!(
                "{} trailing bytes after payload",
                self.buf.len() - self.pos
            ));
        }
        Ok(())
    }
}

fn expect_magic(cur: &mut Cursor, magic: &str) -> Result<()> {
    let got = cur.line()?;
    if got != magic {
        return format_err(format!("bad magic '{got}', expected '{magic}'"));
    }
    Ok(())
}

fn parse_fields<const N: usize>(line: &str) -> Result<[&str; N]> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    parts
        .try_into()
        .map_err(|_| Error::Format(format!("expected {N} fields in header line '{line}'")))
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Format(format!("cannot parse header field '{s}'")))
}

fn push_values(out: &mut Vec<u8>, values: &[C64]) {
    out.reserve(values.len() * 16);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
}

pub fn encode_sinogram(s: &Sinogram) -> Vec<u8> {
    let mut out = format!("{SINO_MAGIC}\n{} {}\n", s.nbeta(), s.nalpha()).into_bytes();
    push_values(&mut out, s.values());
    out
}

pub fn decode_sinogram(buf: &[u8]) -> Result<Sinogram> {
    let mut cur = Cursor::new(buf);
    expect_magic(&mut cur, SINO_MAGIC)?;
    let [nb, na] = parse_fields::<2>(cur.line()?)?;
    let grid = SinoGrid::new(parse(nb)?, parse(na)?)
        .map_err(|e| Error::Format(format!("bad sinogram dimensions: {e}")))?;
    let values = cur.complex_values(grid.len())?;
    cur.finish()?;
    Sinogram::from_values(grid, values)
}

pub fn write_sinogram(s: &Sinogram, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_sinogram(s))?)
}

pub fn read_sinogram(path: impl AsRef<Path>) -> Result<Sinogram> {
    decode_sinogram(&fs::read(path)?)
}

fn image_header(img: &DiskImage) -> String {
    // `{:?}` prints the shortest decimal that parses back to the same f64
    format!(
        "{IMAGE_MAGIC}\n{} {} {:?}\n",
        img.nx(),
        img.ny(),
        img.r_mask()
    )
}

pub fn encode_image(img: &DiskImage) -> Vec<u8> {
    let mut out = image_header(img).into_bytes();
    push_values(&mut out, img.values());
    out
}

fn decode_image_from(cur: &mut Cursor) -> Result<DiskImage> {
    expect_magic(cur, IMAGE_MAGIC)?;
    let [nx, ny, r] = parse_fields::<3>(cur.line()?)?;
    let grid = ImageGrid::new(parse(nx)?, parse(ny)?, parse(r)?)
        .map_err(|e| Error::Format(format!("bad image dimensions: {e}")))?;
    let values = cur.complex_values(grid.len())?;
    DiskImage::from_values(grid, values)
}

pub fn decode_image(buf: &[u8]) -> Result<DiskImage> {
    let mut cur = Cursor::new(buf);
    let img = decode_image_from(&mut cur)?;
    cur.finish()?;
    Ok(img)
}

pub fn write_image(img: &DiskImage, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_image(img))?)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<DiskImage> {
    decode_image(&fs::read(path)?)
}

pub fn encode_tensor(t: &TensorField) -> Vec<u8> {
    let mut out = format!("{TENSOR_MAGIC}\n{} {}\n", t.order(), t.components().len()).into_bytes();
    for (k, img) in t.components() {
        out.extend_from_slice(format!("{k}\n").as_bytes());
        out.extend_from_slice(&encode_image(img));
    }
    out
}

/// Decodes a tensor file. The format carries no realness flag, so realness is
/// inferred from the conjugation symmetry of the stored components.
pub fn decode_tensor(buf: &[u8]) -> Result<TensorField> {
    let mut cur = Cursor::new(buf);
    expect_magic(&mut cur, TENSOR_MAGIC)?;
    let [m, n] = parse_fields::<2>(cur.line()?)?;
    let order: u32 = parse(m)?;
    let ncomp: usize = parse(n)?;
    let mut comps = BTreeMap::new();
    let mut grid = None;
    for _ in 0..ncomp {
        let k: i32 = parse(cur.line()?)?;
        let img = decode_image_from(&mut cur)?;
        match grid {
            None => grid = Some(img.grid()),
            Some(g) if g != img.grid() => {
                return format_err("tensor components use different grids")
            }
            _ => {}
        }
        if comps.insert(k, img).is_some() {
            return format_err(format!("duplicate harmonic {k}"));
        }
    }
    cur.finish()?;
    let Some(grid) = grid else {
        return format_err("tensor file without components has no grid");
    };
    let t = TensorField::new(order, grid, comps, false)?;
    if t.realness_deviation() <= 1e-12 {
        let (order, comps) = (t.order(), t.components().clone());
        return TensorField::new(order, grid, comps, true);
    }
    Ok(t)
}

pub fn write_tensor(t: &TensorField, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_tensor(t))?)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<TensorField> {
    decode_tensor(&fs::read(path)?)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sinogram_csv(s: &Sinogram) -> String {
    let g = s.grid();
    let mut out = String::from("b,a,beta,alpha,re,im\n");
    for b in 0..g.nbeta {
        for a in 0..g.nalpha {
            let v = s.get(b, a);
            let _ = writeln!(
                out,
                "{b},{a},{},{},{},{}",
                num(g.beta(b)),
                num(g.alpha(a)),
                num(v.re),
                num(v.im)
            );
        }
    }
    out
}

pub fn boundary_csv(f: &BoundaryField) -> String {
    let g = f.grid();
    let mut out = String::from("b,a,beta,alpha,re,im\n");
    for b in 0..g.nbeta {
        for a in 0..f.nalphafull() {
            let v = f.get(b, a);
            let _ = writeln!(
                out,
                "{b},{a},{},{},{},{}",
                num(g.beta(b)),
                num(f.alpha(a)),
                num(v.re),
                num(v.im)
            );
        }
    }
    out
}

fn image_rows(out: &mut String, prefix: &str, img: &DiskImage) {
    let g = img.grid();
    for i in 0..g.nx {
        for j in 0..g.ny {
            let v = img.get(i, j);
            let _ = writeln!(
                out,
                "{prefix}{i},{j},{},{},{},{}",
                num(g.x(i)),
                num(g.y(j)),
                num(v.re),
                num(v.im)
            );
        }
    }
}

pub fn image_csv(img: &DiskImage) -> String {
    let mut out = String::from("i,j,x,y,re,im\n");
    image_rows(&mut out, "", img);
    out
}

pub fn tensor_csv(t: &TensorField) -> String {
    let mut out = String::from("k,i,j,x,y,re,im\n");
    for (k, img) in t.components() {
        image_rows(&mut out, &format!("{k},"), img);
    }
    out
}

pub fn coeffs_csv(t: &CoeffTable) -> String {
    let mut out = String::from("family,p,q,re,im\n");
    for (&(p, q), c) in t.iter() {
        let _ = writeln!(
            out,
            "{},{p},{q},{},{}",
            t.basis().name(),
            num(c.re),
            num(c.im)
        );
    }
    out
}

/// Scalar channel extracted for rendering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Re,
    Im,
    Abs,
}

impl Channel {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "re" => Ok(Channel::Re),
            "im" => Ok(Channel::Im),
            "abs" => Ok(Channel::Abs),
            _ => Err(Error::InvalidArgument(format!("unknown channel '{s}'"))),
        }
    }

    fn apply(self, v: C64) -> f64 {
        match self {
            Channel::Re => v.re,
            Channel::Im => v.im,
            Channel::Abs => v.norm(),
        }
    }
}

/// A rendered 16-bit grayscale raster with the bounds used for scaling.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u16>,
    pub min: f64,
    pub max: f64,
}

impl Raster {
    pub fn pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n65535\n", self.width, self.height).into_bytes();
        for p in &self.pixels {
            out.extend_from_slice(&p.to_be_bytes());
        }
        out
    }

    pub fn sidecar(&self, channel: Channel) -> String {
        let ch = match channel {
            Channel::Re => "re",
            Channel::Im => "im",
            Channel::Abs => "abs",
        };
        format!(
            "channel {ch}\nmin {}\nmax {}\n",
            num(self.min),
            num(self.max)
        )
    }
}

/// Linear min-max scaling of row-major values to 16 bits. A constant input
/// renders as all zeros.
pub fn rasterize(values: &[C64], height: usize, width: usize, channel: Channel) -> Result<Raster> {
    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::InvalidArgument(
            "cannot render non-finite values".into(),
        ));
    }
    let xs: Vec<f64> = values.iter().map(|&v| channel.apply(v)).collect();
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pixels = if max > min {
        xs.iter()
            .map(|x| ((x - min) / (max - min) * 65535.0).round() as u16)
            .collect()
    } else {
        vec![0; xs.len()]
    };
    Ok(Raster {
        width,
        height,
        pixels,
        min,
        max,
    })
}

/// Raster of an image; row `i` is the `x` index and column `j` the `y` index,
/// matching the storage order.
pub fn rasterize_image(img: &DiskImage, channel: Channel) -> Result<Raster> {
    rasterize(img.values(), img.nx(), img.ny(), channel)
}

/// Raster of a sinogram; rows are `beta`, columns `alpha`.
pub fn rasterize_sinogram(s: &Sinogram, channel: Channel) -> Result<Raster> {
    rasterize(s.values(), s.nbeta(), s.nalpha(), channel)
}

/// Writes `path` as a binary PGM and `path.txt` with the scaling bounds.
pub fn write_pgm(raster: &Raster, channel: Channel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, raster.pgm_bytes())?;
    let mut side = path.as_os_str().to_owned();
    side.push(".txt");
    fs::write(side, raster.sidecar(channel))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sinogram_round_trip_zeros() {
        let s = Sinogram::zeros(SinoGrid::new(4, 2).unwrap());
        assert_eq!(decode_sinogram(&encode_sinogram(&s)).unwrap(), s);
    }

    #[test]
    fn sinogram_bad_inputs() {
        let s = Sinogram::zeros(SinoGrid::new(4, 2).unwrap());
        let mut bytes = encode_sinogram(&s);
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_sinogram(&bytes), Err(Error::Format(_))));
        let bytes = encode_sinogram(&s);
        assert!(matches!(
            decode_sinogram(&bytes[..bytes.len() - 3]),
            Err(Error::Format(_))
        ));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_sinogram(&long), Err(Error::Format(_))));
        assert!(matches!(
            decode_sinogram(b"FBSG1\n4\n"),
            Err(Error::Format(_))
        ));
        assert!(matches!(decode_sinogram(b""), Err(Error::Format(_))));
    }

    #[test]
    fn large_sinogram_round_trip_is_bit_exact() {
        let g = SinoGrid::new(600, 300).unwrap();
        let s = Sinogram::from_fn(g, |b, a| c((3.0 * b).sin() / 7.0, a.cos().ln()));
        let bytes = encode_sinogram(&s);
        let back = decode_sinogram(&bytes).unwrap();
        assert_eq!(encode_sinogram(&back), bytes);
        assert!(back.values().iter().zip(s.values()).all(|(x, y)| {
            x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
        }));
    }

    #[test]
    fn image_round_trip_and_mask_violation() {
        let g = ImageGrid::new(8, 8, 1.0).unwrap();
        let z = DiskImage::zeros(g);
        assert_eq!(decode_image(&encode_image(&z)).unwrap(), z);
        let g = ImageGrid::new(7, 5, 0.8137).unwrap();
        let f = DiskImage::from_fn(g, |x, y| c(x / 3.0, y * 1e-300));
        assert_eq!(decode_image(&encode_image(&f)).unwrap(), f);
        let mut bytes = encode_image(&z);
        let n = bytes.len();
        // the last pixel is a corner, outside the disk
        bytes[n - 16..n - 8].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(matches!(decode_image(&bytes), Err(Error::Validation(_))));
    }

    #[test]
    fn tensor_round_trip_with_missing_key() {
        let g = ImageGrid::square(6).unwrap();
        let f = DiskImage::from_fn(g, c);
        let mut comps = BTreeMap::new();
        comps.insert(2, f.clone());
        comps.insert(-2, f.conj());
        let t = TensorField::new(2, g, comps, true).unwrap();
        let back = decode_tensor(&encode_tensor(&t)).unwrap();
        assert_eq!(back, t);
        assert!(back.is_real());
        assert_eq!(back.component_or_zero(0), DiskImage::zeros(g));
        let single = TensorField::single(3, f);
        let back = decode_tensor(&encode_tensor(&single)).unwrap();
        assert_eq!(back, single);
        assert!(!back.is_real());
    }

    #[test]
    fn csv_has_17_digits() {
        let mut t = CoeffTable::new(crate::grid::Basis::UPrime);
        t.insert(0, 0, c(1.0 / 3.0, 0.0)).unwrap();
        let s = coeffs_csv(&t);
        assert_eq!(s.lines().next().unwrap(), "family,p,q,re,im");
        let line = s.lines().nth(1).unwrap();
        assert!(line.starts_with("u',0,0,3.3333333333333331e-1,"));
        let v: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }

    #[test]
    fn pgm_scaling() {
        let r = rasterize(
            &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
            2,
            2,
            Channel::Re,
        )
        .unwrap();
        assert_eq!(r.pixels, vec![0, 21845, 43690, 65535]);
        let bytes = r.pgm_bytes();
        assert!(bytes.starts_with(b"P5\n2 2\n65535\n"));
        assert_eq!(&bytes[bytes.len() - 2..], &[0xff, 0xff]);
        let r = rasterize(&[c(5.0, 1.0); 4], 2, 2, Channel::Re).unwrap();
        assert_eq!(r.pixels, vec![0; 4]);
        let r = rasterize(&[c(-2.0, 0.0); 4], 2, 2, Channel::Abs).unwrap();
        assert_eq!((r.min, r.max), (2.0, 2.0));
        assert!(rasterize(&[c(f64::NAN, 0.0)], 1, 1, Channel::Im).is_err());
    }
}
