"""
The classical receiver: LS estimate, LMMSE, LLR demapping
=========================================================

First an AWGN sanity check against the Q-function, then the BER of the full
chain over a fading channel as the SNR rises.
"""
import numpy as np
from scipy.special import erfc

from rxprobe.linksim import ScenarioParams, SignalConfig, apply_channel, sample_realization, transmit_batch
from rxprobe.receivers.classic import classical_receiver, demap_llr, hard_ber, lmmse_equalize

# %% QPSK on a flat unit channel with known H
cfg = SignalConfig(modulation="QPSK")
bits, tx, _, _ = transmit_batch(3, cfg, 200)
rng = np.random.default_rng(3)
for ebno in (2, 4, 6):
    nv = 10 ** (-ScenarioParams.ebno_to_snr(ebno, "QPSK") / 10)
    rx = tx + np.sqrt(nv / 2) * (rng.standard_normal(tx.shape) + 1j * rng.standard_normal(tx.shape))
    x_hat, no = lmmse_equalize(rx, np.ones_like(rx), nv)
    ber = hard_ber(demap_llr(x_hat, "QPSK", no), bits, cfg.data_mask)
    print(f"Eb/N0 {ebno} dB: BER {ber:.5f}   Q(sqrt(2Eb/N0)) {0.5 * erfc(np.sqrt(10 ** (ebno / 10))):.5f}")

# %% 16QAM over TDL-D with pilot-based estimation
cfg = SignalConfig(modulation="16QAM")
bits, tx, pilots, mask = transmit_batch(5, cfg, 50)
real = sample_realization(5, 50, "TDL-D", config=cfg)
print("\nSNR  BER (16QAM, 10 m/s, 150 ns)")
for snr in (0, 5, 10, 15, 20, 25):
    rx, _ = apply_channel(tx, real, ScenarioParams(10.0, 150.0, -snr), "TDL-D", cfg)
    llr, _ = classical_receiver(rx, pilots, mask, 10 ** (-snr / 10), "16QAM")
    print(f"{snr:3d}  {hard_ber(llr, bits, cfg.data_mask):.4f}")
