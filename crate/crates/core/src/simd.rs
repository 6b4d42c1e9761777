//! The dense faer kernels can return with the upper halves of the AVX
//! registers dirty. Until that state is cleared, every legacy-SSE
//! instruction on the same thread pays a transition penalty, which slowed
//! the scalar Gram and solver loops roughly twelvefold on AVX-512 hardware.

/// Issues `vzeroupper` on the current thread when AVX is available.
#[inline]
pub(crate) fn clear_upper_state() {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx") {
        // SAFETY: AVX support was checked at runtime.
        unsafe { zeroupper() }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn zeroupper() {
    std::arch::x86_64::_mm256_zeroupper();
}
