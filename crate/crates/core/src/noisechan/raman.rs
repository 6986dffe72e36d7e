use super::NoiseError;

/// Off-resonant Raman scattering rate `Omega_1 Omega_2 gamma_P / Delta^2`.
/// All inputs in rad/s; returns 1/s.
pub fn raman_rate(omega_1: f64, omega_2: f64, detuning: f64, linewidth: f64) -> Result<f64, NoiseError> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(NoiseError::ZeroDetuning);
    }
    Ok((omega_1 * omega_2 / (detuning * detuning) * linewidth).abs())
}

/// Scattering probability accumulated over a gate,
/// `(Omega_R gamma_P / Delta) tau`, with the two-photon Rabi rate
/// `Omega_R = Omega_1 Omega_2 / Delta`.
pub fn scatter_budget(rabi: f64, linewidth: f64, detuning: f64, tau: f64) -> Result<f64, NoiseError> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(NoiseError::ZeroDetuning);
    }
    Ok((rabi * linewidth / detuning * tau).abs())
}
