//! RIFF/WAVE reading and writing.
//!
//! Samples live in 64-bit floats in [-1, 1) in memory. Integer formats
//! quantize on write with hard clipping; the writer reports how many samples
//! clipped so callers can record the count in a manifest. Unknown chunks are
//! skipped on read, and the declared data length must match the payload.

use std::path::Path;

use crate::error::{Error, Result};

use crate::dsp::{MonoSignal, MultichannelSignal};

const PCM16_SCALE: f64 = 32768.0;
const PCM24_SCALE: f64 = 8388608.0;

/// On-disk sample encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Pcm16,
    Pcm24,
    Float32,
}

impl SampleFormat {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            SampleFormat::Pcm16 => 2,
            SampleFormat::Pcm24 => 3,
            SampleFormat::Float32 => 4,
        }
    }

    fn wave_format_tag(self) -> u16 {
        match self {
            SampleFormat::Pcm16 | SampleFormat::Pcm24 => 1,
            SampleFormat::Float32 => 3,
        }
    }
}

/// A decoded WAV file: deinterleaved channels of f64 samples.
#[derive(Debug, Clone)]
pub struct WavFile {
    pub format: SampleFormat,
    pub sample_rate: u32,
    pub channels: Vec<Vec<f64>>,
}

impl WavFile {
    pub fn new(format: SampleFormat, sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::EmptyInput("wav channels"));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be nonzero".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidArgument(
                "wav channels must share a length".into(),
            ));
        }
        Ok(WavFile {
            format,
            sample_rate,
            channels,
        })
    }

    pub fn from_signal(signal: &MultichannelSignal, format: SampleFormat) -> Result<Self> {
        WavFile::new(
            format,
            signal.sample_rate(),
            signal.channels.iter().map(|c| c.samples.clone()).collect(),
        )
    }

    pub fn to_signal(&self) -> Result<MultichannelSignal> {
        let channels = self
            .channels
            .iter()
            .map(|c| MonoSignal::new(c.clone(), self.sample_rate))
            .collect::<Result<Vec<_>>>()?;
        MultichannelSignal::new(channels)
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn frame_count(&self) -> usize {
        self.channels[0].len()
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(self.malformed(format!(
                "unexpected end of file at byte {} (wanted {n} more)",
                self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn malformed(&self, reason: String) -> Error {
        Error::MalformedWav {
            path: self.path.to_path_buf(),
            reason,
        }
    }

    fn unsupported(&self, reason: String) -> Error {
        Error::UnsupportedWav {
            path: self.path.to_path_buf(),
            reason,
        }
    }
}

struct FmtChunk {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
    block_align: u16,
}

/// Reads a WAV file. Supported encodings: 16-bit PCM, 24-bit PCM, 32-bit
/// IEEE float. Chunks other than `fmt ` and `data` are skipped.
pub fn read_wav(path: impl AsRef<Path>) -> Result<WavFile> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
        path,
    };

    if r.take(4)? != b"RIFF" {
        return Err(r.malformed("missing RIFF magic".into()));
    }
    let riff_size = r.u32()? as usize;
    if riff_size + 8 > bytes.len() {
        return Err(r.malformed(format!(
            "RIFF size {riff_size} exceeds file length {}",
            bytes.len()
        )));
    }
    if r.take(4)? != b"WAVE" {
        return Err(r.malformed("missing WAVE form type".into()));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    while r.pos + 8 <= bytes.len() {
        let id: [u8; 4] = r.take(4)?.try_into().unwrap();
        let size = r.u32()? as usize;
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(r.malformed(format!("fmt chunk too small ({size} bytes)")));
                }
                let body = r.take(size)?;
                fmt = Some(FmtChunk {
                    format_tag: u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    channels: u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    sample_rate: u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    block_align: u16::from_le_bytes(body[12..14].try_into().unwrap()),
                    bits_per_sample: u16::from_le_bytes(body[14..16].try_into().unwrap()),
                });
            }
            b"data" => {
                data = Some(r.take(size)?);
            }
            _ => {
                r.take(size)?;
            }
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        if size % 2 == 1 && r.pos < bytes.len() {
            r.take(1)?;
        }
    }

    let fmt = fmt.ok_or_else(|| r.malformed("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| r.malformed("missing data chunk".into()))?;

    let format = match (fmt.format_tag, fmt.bits_per_sample) {
        (1, 16) => SampleFormat::Pcm16,
        (1, 24) => SampleFormat::Pcm24,
        (3, 32) => SampleFormat::Float32,
        (tag, bits) => {
            return Err(r.unsupported(format!("format tag {tag} with {bits} bits per sample")))
        }
    };
    if fmt.channels == 0 {
        return Err(r.malformed("zero channels".into()));
    }
    if fmt.sample_rate == 0 {
        return Err(r.malformed("zero sample rate".into()));
    }
    let bps = format.bytes_per_sample();
    let expect_align = fmt.channels as usize * bps;
    if fmt.block_align as usize != expect_align {
        return Err(r.malformed(format!(
            "block align {} does not match {} channels of {} bytes",
            fmt.block_align, fmt.channels, bps
        )));
    }
    if data.len() % expect_align != 0 {
        return Err(r.malformed(format!(
            "data length {} is not a whole number of {expect_align}-byte frames",
            data.len()
        )));
    }

    let frames = data.len() / expect_align;
    let mut channels = vec![Vec::with_capacity(frames); fmt.channels as usize];
    for f in 0..frames {
        for (c, ch) in channels.iter_mut().enumerate() {
            let off = f * expect_align + c * bps;
            let v = match format {
                SampleFormat::Pcm16 => {
                    i16::from_le_bytes(data[off..off + 2].try_into().unwrap()) as f64 / PCM16_SCALE
                }
                SampleFormat::Pcm24 => {
                    let q = i32::from_le_bytes([data[off], data[off + 1], data[off + 2], 0]) << 8
                        >> 8;
                    q as f64 / PCM24_SCALE
                }
                SampleFormat::Float32 => {
                    f32::from_le_bytes(data[off..off + 4].try_into().unwrap()) as f64
                }
            };
            ch.push(v);
        }
    }

    WavFile::new(format, fmt.sample_rate, channels)
}

fn quantize(x: f64, scale: f64, min: i64, max: i64, clipped: &mut u64) -> i64 {
    let q = (x * scale).round() as i64;
    if q < min {
        *clipped += 1;
        min
    } else if q > max {
        *clipped += 1;
        max
    } else {
        q
    }
}

/// Writes a WAV file and returns the number of hard-clipped samples.
/// Samples outside [-1, 1) clip: integer formats clamp in the quantizer,
/// float32 clamps to the representable range below 1.0.
pub fn write_wav(path: impl AsRef<Path>, wav: &WavFile) -> Result<u64> {
    let path = path.as_ref();
    let channels = wav.channel_count();
    let frames = wav.frame_count();
    let bps = wav.format.bytes_per_sample();
    let block_align = channels * bps;
    let data_len = frames * block_align;
    let byte_rate = wav.sample_rate as usize * block_align;

    // float32 carries an 18-byte fmt (cbSize = 0) plus a fact chunk, as
    // required for non-PCM encodings.
    let is_float = wav.format == SampleFormat::Float32;
    let fmt_len = if is_float { 18 } else { 16 };
    let fact_len = if is_float { 12 } else { 0 };
    let data_pad = data_len % 2;
    let riff_size = 4 + (8 + fmt_len) + fact_len + (8 + data_len + data_pad);

    let mut out = Vec::with_capacity(riff_size + 8);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(riff_size as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&(fmt_len as u32).to_le_bytes());
    out.extend_from_slice(&wav.format.wave_format_tag().to_le_bytes());
    out.extend_from_slice(&(channels as u16).to_le_bytes());
    out.extend_from_slice(&wav.sample_rate.to_le_bytes());
    out.extend_from_slice(&(byte_rate as u32).to_le_bytes());
    out.extend_from_slice(&(block_align as u16).to_le_bytes());
    out.extend_from_slice(&(8 * bps as u16).to_le_bytes());
    if is_float {
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(b"fact");
        out.extend_from_slice(&4u32.to_le_bytes());
        out.extend_from_slice(&(frames as u32).to_le_bytes());
    }
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());

    let mut clipped = 0u64;
    for f in 0..frames {
        for ch in &wav.channels {
            let x = ch[f];
            match wav.format {
                SampleFormat::Pcm16 => {
                    let q = quantize(x, PCM16_SCALE, -32768, 32767, &mut clipped) as i16;
                    out.extend_from_slice(&q.to_le_bytes());
                }
                SampleFormat::Pcm24 => {
                    let q = quantize(x, PCM24_SCALE, -8388608, 8388607, &mut clipped) as i32;
                    out.extend_from_slice(&q.to_le_bytes()[..3]);
                }
                SampleFormat::Float32 => {
                    let v = if x >= 1.0 {
                        clipped += 1;
                        0.999_999_94_f32
                    } else if x < -1.0 {
                        clipped += 1;
                        -1.0
                    } else {
                        x as f32
                    };
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }
    if data_pad == 1 {
        out.push(0);
    }

    std::fs::write(path, &out).map_err(|e| Error::io(path, e))?;
    Ok(clipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("replaysim-wav-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn float32_round_trip_is_bit_identical() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let data: Vec<f64> = (0..10_000)
            .map(|_| (rng.gen_range(-1.0f64..1.0) as f32) as f64)
            .collect();
        let wav = WavFile::new(SampleFormat::Float32, 48_000, vec![data.clone()]).unwrap();
        let p = tmp("f32.wav");
        let clipped = write_wav(&p, &wav).unwrap();
        assert_eq!(clipped, 0);
        let back = read_wav(&p).unwrap();
        assert_eq!(back.format, SampleFormat::Float32);
        assert_eq!(back.sample_rate, 48_000);
        assert_eq!(back.channels[0], data);
    }

    #[test]
    fn pcm16_full_scale_sine_error_within_one_lsb() {
        let data: Vec<f64> = (0..4800)
            .map(|i| (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 48_000.0).sin())
            .collect();
        let wav = WavFile::new(SampleFormat::Pcm16, 48_000, vec![data.clone()]).unwrap();
        let p = tmp("pcm16.wav");
        write_wav(&p, &wav).unwrap();
        let back = read_wav(&p).unwrap();
        let worst = data
            .iter()
            .zip(&back.channels[0])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst <= 1.0 / 32768.0, "round-trip error {worst}");
    }

    #[test]
    fn pcm24_round_trip_within_one_lsb() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        let data: Vec<f64> = (0..5000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let wav = WavFile::new(SampleFormat::Pcm24, 16_000, vec![data.clone(); 2]).unwrap();
        let p = tmp("pcm24.wav");
        let clipped = write_wav(&p, &wav).unwrap();
        assert_eq!(clipped, 0);
        let back = read_wav(&p).unwrap();
        assert_eq!(back.channel_count(), 2);
        for ch in &back.channels {
            let worst = data
                .iter()
                .zip(ch)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(worst <= 1.0 / PCM24_SCALE, "round-trip error {worst}");
        }
    }

    #[test]
    fn stereo_pcm24_header_arithmetic() {
        let wav =
            WavFile::new(SampleFormat::Pcm24, 48_000, vec![vec![0.0; 16]; 2]).unwrap();
        let p = tmp("header.wav");
        write_wav(&p, &wav).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[0..4], b"RIFF");
        assert_eq!(&bytes[8..12], b"WAVE");
        assert_eq!(&bytes[12..16], b"fmt ");
        let byte_rate = u32::from_le_bytes(bytes[28..32].try_into().unwrap());
        let block_align = u16::from_le_bytes(bytes[32..34].try_into().unwrap());
        let bits = u16::from_le_bytes(bytes[34..36].try_into().unwrap());
        assert_eq!(byte_rate, 48_000 * 2 * 3);
        assert_eq!(block_align, 6);
        assert_eq!(bits, 24);
        let declared = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        assert_eq!(declared + 8, bytes.len());
    }

    #[test]
    fn clipping_is_counted_and_clamped() {
        let data = vec![1.5, -2.0, 0.5, 1.0];
        let wav = WavFile::new(SampleFormat::Pcm24, 48_000, vec![data]).unwrap();
        let p = tmp("clip.wav");
        let clipped = write_wav(&p, &wav).unwrap();
        // +1.0 quantizes to 8388608, one past the largest code, so it clips.
        assert_eq!(clipped, 3);
        let back = read_wav(&p).unwrap();
        let ch = &back.channels[0];
        assert!((ch[0] - (8388607.0 / PCM24_SCALE)).abs() < 1e-12);
        assert!((ch[1] + 1.0).abs() < 1e-12);
        assert!((ch[2] - 0.5).abs() <= 1.0 / PCM24_SCALE);
    }

    #[test]
    fn unknown_chunks_are_skipped() {
        let wav = WavFile::new(SampleFormat::Pcm16, 16_000, vec![vec![0.25; 8]]).unwrap();
        let p = tmp("chunky.wav");
        write_wav(&p, &wav).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        // Splice a LIST chunk between fmt and data.
        let mut spliced = bytes[..36].to_vec();
        spliced.extend_from_slice(b"LIST");
        spliced.extend_from_slice(&5u32.to_le_bytes());
        spliced.extend_from_slice(b"INFOx");
        spliced.push(0); // pad to even
        spliced.extend_from_slice(&bytes[36..]);
        let new_riff = (spliced.len() - 8) as u32;
        spliced[4..8].copy_from_slice(&new_riff.to_le_bytes());
        let p2 = tmp("chunky2.wav");
        std::fs::write(&p2, &spliced).unwrap();
        let back = read_wav(&p2).unwrap();
        assert_eq!(back.channels[0].len(), 8);
        assert!((back.channels[0][0] - 0.25).abs() <= 1.0 / PCM16_SCALE);
    }

    #[test]
    fn truncated_and_malformed_files_give_typed_errors() {
        let wav = WavFile::new(SampleFormat::Pcm16, 16_000, vec![vec![0.1; 100]]).unwrap();
        let p = tmp("trunc.wav");
        write_wav(&p, &wav).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let p2 = tmp("trunc2.wav");
        std::fs::write(&p2, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(read_wav(&p2), Err(Error::MalformedWav { .. })));

        let p3 = tmp("notwav.wav");
        std::fs::write(&p3, b"RIFX....WAVE").unwrap();
        assert!(matches!(read_wav(&p3), Err(Error::MalformedWav { .. })));
    }

    #[test]
    fn unsupported_encodings_are_reported() {
        // 8-bit PCM header.
        let mut out: Vec<u8> = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36u32 + 4).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&8000u32.to_le_bytes());
        out.extend_from_slice(&8000u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&8u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&4u32.to_le_bytes());
        out.extend_from_slice(&[128u8; 4]);
        let p = tmp("pcm8.wav");
        std::fs::write(&p, &out).unwrap();
        assert!(matches!(read_wav(&p), Err(Error::UnsupportedWav { .. })));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            read_wav("/nonexistent/nope.wav"),
            Err(Error::Io { .. })
        ));
    }
}
