//! Application pipelines built on the solvers: CUR completion, Lorenz filter
//! identification and FFT deblurring. Images are quaternion fields with the
//! colour channels on `i`, `j`, `k` and values in `[0, 1]`.

pub mod cur;
pub mod deblur;
pub mod fft;
pub mod image;
pub mod lorenz;

pub use cur::{complete, complete_with, cur_reconstruct, CompletionProblem, CurMode};
pub use deblur::{deblur_fft_ns, gaussian_psf, DeblurOutput, DeblurProblem, Kernel};
pub use fft::{fft, fft2, ifft, ifft2};
pub use image::{gaussian_smooth, psnr, read_ppm, synthetic_image, write_ppm, PSNR_CAP_DB};
pub use lorenz::{integrate_lorenz, lorenz_build, lorenz_solve_ns, LorenzFit, LorenzParams, LorenzProblem, LorenzSystem};
