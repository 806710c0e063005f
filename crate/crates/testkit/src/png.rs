//! Minimal PNG reader: signature, chunk CRCs, IHDR, zlib-inflated IDAT
//! and the five scanline filters. Handles 8-bit RGBA and RGB only.

use std::io::Read;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedPng {
    pub width: u32,
    pub height: u32,
    /// Row-major RGBA, 4 bytes per pixel.
    pub rgba: Vec<u8>,
}

const SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

fn crc32(bytes: &[u8]) -> u32 {
    let mut crc = 0xffff_ffffu32;
    for &b in bytes {
        crc ^= u32::from(b);
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xedb8_8320 & mask);
        }
    }
    !crc
}

fn be32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

fn paeth(a: u8, b: u8, c: u8) -> u8 {
    let p = i16::from(a) + i16::from(b) - i16::from(c);
    let (pa, pb, pc) = (
        (p - i16::from(a)).abs(),
        (p - i16::from(b)).abs(),
        (p - i16::from(c)).abs(),
    );
    if pa <= pb && pa <= pc {
        a
    } else if pb <= pc {
        b
    } else {
        c
    }
}

pub fn decode(data: &[u8]) -> Result<DecodedPng, String> {
    if data.len() < 8 || data[..8] != SIGNATURE {
        return Err("bad signature".into());
    }
    let mut pos = 8;
    let mut header = None;
    let mut idat = Vec::new();
    let mut seen_end = false;
    while pos + 12 <= data.len() {
        let len = be32(&data[pos..]) as usize;
        let kind = &data[pos + 4..pos + 8];
        let body_end = pos + 8 + len;
        if body_end + 4 > data.len() {
            return Err("truncated chunk".into());
        }
        let body = &data[pos + 8..body_end];
        if crc32(&data[pos + 4..body_end]) != be32(&data[body_end..]) {
            return Err(format!("crc mismatch in {}", String::from_utf8_lossy(kind)));
        }
        match kind {
            b"IHDR" => {
                if body.len() != 13 {
                    return Err("bad IHDR".into());
                }
                header = Some((be32(body), be32(&body[4..]), body[8], body[9], body[12]));
            }
            b"IDAT" => idat.extend_from_slice(body),
            b"IEND" => {
                seen_end = true;
                break;
            }
            _ => {}
        }
        pos = body_end + 4;
    }
    if !seen_end {
        return Err("missing IEND".into());
    }
    let (width, height, depth, color, interlace) = header.ok_or("missing IHDR")?;
    if depth != 8 || interlace != 0 {
        return Err(format!("unsupported depth {depth} / interlace {interlace}"));
    }
    let channels = match color {
        6 => 4,
        2 => 3,
        other => return Err(format!("unsupported color type {other}")),
    };
    let mut raw = Vec::new();
    flate2::read::ZlibDecoder::new(&idat[..])
        .read_to_end(&mut raw)
        .map_err(|e| e.to_string())?;
    let stride = width as usize * channels;
    if raw.len() != (stride + 1) * height as usize {
        return Err(format!(
            "expected {} bytes, got {}",
            (stride + 1) * height as usize,
            raw.len()
        ));
    }
    let mut prev = vec![0u8; stride];
    let mut out = Vec::with_capacity(width as usize * height as usize * 4);
    for row in raw.chunks_exact(stride + 1) {
        let filter = row[0];
        let mut cur = row[1..].to_vec();
        for i in 0..stride {
            let a = if i >= channels { cur[i - channels] } else { 0 };
            let b = prev[i];
            let c = if i >= channels { prev[i - channels] } else { 0 };
            cur[i] = cur[i].wrapping_add(match filter {
                0 => 0,
                1 => a,
                2 => b,
                3 => ((u16::from(a) + u16::from(b)) / 2) as u8,
                4 => paeth(a, b, c),
                f => return Err(format!("bad filter {f}")),
            });
        }
        for px in cur.chunks_exact(channels) {
            out.extend_from_slice(px);
            if channels == 3 {
                out.push(255);
            }
        }
        prev = cur;
    }
    Ok(DecodedPng {
        width,
        height,
        rgba: out,
    })
}
