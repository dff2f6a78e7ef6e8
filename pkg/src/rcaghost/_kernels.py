"""Numba kernels for the echo simulator and the delay-and-sum beamformer.

Both kernels parallelize over independent output cells (channels here,
voxels there) and keep a fixed inner summation order, so results are
bit-identical for any worker count.  Transmit elements extend along x and
receive elements along y unless ``swapped`` is set, in which case the two
roles (and the clamp axes) flip.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def simulate_channels(
    scat_pos,      # (n_scat, 3) float64 scatterer positions [m]
    scat_amp,      # (n_scat,) float64 scattering amplitudes
    tx_off,        # (n_tx,) float64 transmit element offsets [m]
    tx_hl,         # float64 transmit element half-length [m]
    rx_off,        # (n_rx,) float64 receive element offsets [m]
    rx_hl,         # float64 receive element half-length [m]
    swapped,       # bool, True when columns transmit
    amp_main,      # float64 sub-path-1 relative amplitude
    amp_edge,      # float64 sub-path-2/3 relative amplitude
    spreading,     # bool, divide by d_tx * d_rx when True
    c,             # float64 speed of sound [m/s]
    t0,            # float64 time of the first sample [s]
    fs,            # float64 sampling rate [Hz]
    pulse,         # (n_pulse,) float64 pulse samples
    out,           # (n_tx, n_rx, n_t) float32 output traces
):
    n_scat = scat_pos.shape[0]
    n_tx = tx_off.shape[0]
    n_rx = rx_off.shape[0]
    n_t = out.shape[2]
    n_pulse = pulse.shape[0]
    sub_amp = np.array([amp_main, amp_edge, amp_edge])

    for ch in prange(n_tx * n_rx):
        t = ch // n_rx
        r = ch % n_rx
        toff = tx_off[t]
        roff = rx_off[r]
        spikes = np.zeros(n_t)
        d_tx = np.empty(3)
        d_rx = np.empty(3)
        for s in range(n_scat):
            px = scat_pos[s, 0]
            py = scat_pos[s, 1]
            pz = scat_pos[s, 2]
            if swapped:
                tx_e, tx_q = py, px
                rx_e, rx_q = px, py
            else:
                tx_e, tx_q = px, py
                rx_e, rx_q = py, px
            # tx sub-paths: nearest point (clamped projection), then each end
            ce = min(max(tx_e, -tx_hl), tx_hl)
            dq = tx_q - toff
            d_tx[0] = np.sqrt((tx_e - ce) ** 2 + dq * dq + pz * pz)
            d_tx[1] = np.sqrt((tx_e + tx_hl) ** 2 + dq * dq + pz * pz)
            d_tx[2] = np.sqrt((tx_e - tx_hl) ** 2 + dq * dq + pz * pz)
            ce = min(max(rx_e, -rx_hl), rx_hl)
            dq = rx_q - roff
            d_rx[0] = np.sqrt((rx_e - ce) ** 2 + dq * dq + pz * pz)
            d_rx[1] = np.sqrt((rx_e + rx_hl) ** 2 + dq * dq + pz * pz)
            d_rx[2] = np.sqrt((rx_e - rx_hl) ** 2 + dq * dq + pz * pz)
            for n in range(3):
                for i in range(3):
                    d1 = d_tx[n]
                    d2 = d_rx[i]
                    base = sub_amp[n] * sub_amp[i]
                    if spreading:
                        base /= d1 * d2
                    u = ((d1 + d2) / c - t0) * fs
                    k0 = int(np.floor(u))
                    frac = u - k0
                    # scatterer amplitude multiplied last so that splitting
                    # an amplitude across coincident scatterers adds exactly
                    if 0 <= k0 < n_t:
                        spikes[k0] += (base * (1.0 - frac)) * scat_amp[s]
                    k1 = k0 + 1
                    if 0 <= k1 < n_t:
                        spikes[k1] += (base * frac) * scat_amp[s]
        for k in range(n_t):
            acc = 0.0
            for m in range(n_pulse):
                j = k - m
                if j < 0:
                    break
                acc += pulse[m] * spikes[j]
            out[t, r, k] = np.float32(acc)


@njit(cache=True, parallel=True)
def das_volume(
    traces,        # (n_tx, n_rx, n_t) complex64 baseband traces
    t0,            # float64 time of the first trace sample [s]
    fs,            # float64 sampling rate [Hz]
    f0,            # float64 carrier removed during baseband conversion [Hz]
    c,             # float64 speed of sound [m/s]
    tx_off,        # (n_tx,) float64
    tx_hl,         # float64
    rx_off,        # (n_rx,) float64
    rx_hl,         # float64
    swapped,       # bool
    n_sub,         # int64 transmit sub-path (1, 2 or 3)
    i_sub,         # int64 receive sub-path
    rx_w,          # (n_rx,) float64 receive apodization weights
    lag_samples,   # float64 extra sampling delay [samples]
    xs,            # (nx,) float64 voxel centre coordinates [m]
    ys,            # (ny,) float64
    zs,            # (nz,) float64
    out,           # (nx, ny, nz) complex128 output volume
):
    n_tx = tx_off.shape[0]
    n_rx = rx_off.shape[0]
    n_t = traces.shape[2]
    nx = xs.shape[0]
    ny = ys.shape[0]
    nz = zs.shape[0]
    k_wave = 2.0 * np.pi * f0 / c

    for idx in prange(nx * ny * nz):
        ix = idx // (ny * nz)
        rem = idx % (ny * nz)
        iy = rem // nz
        iz = rem % nz
        vx = xs[ix]
        vy = ys[iy]
        vz = zs[iz]
        if swapped:
            tx_e, tx_q = vy, vx
            rx_e, rx_q = vx, vy
        else:
            tx_e, tx_q = vx, vy
            rx_e, rx_q = vy, vx

        if n_sub == 1:
            tx_ce = min(max(tx_e, -tx_hl), tx_hl)
        elif n_sub == 2:
            tx_ce = -tx_hl
        else:
            tx_ce = tx_hl
        if i_sub == 1:
            rx_ce = min(max(rx_e, -rx_hl), rx_hl)
        elif i_sub == 2:
            rx_ce = -rx_hl
        else:
            rx_ce = rx_hl

        d_tx = np.empty(n_tx)
        cos_tx = np.empty(n_tx)
        sin_tx = np.empty(n_tx)
        for t in range(n_tx):
            dq = tx_q - tx_off[t]
            d = np.sqrt((tx_e - tx_ce) ** 2 + dq * dq + vz * vz)
            d_tx[t] = d
            ang = k_wave * d
            cos_tx[t] = np.cos(ang)
            sin_tx[t] = np.sin(ang)
        d_rx = np.empty(n_rx)
        cos_rx = np.empty(n_rx)
        sin_rx = np.empty(n_rx)
        for r in range(n_rx):
            dq = rx_q - rx_off[r]
            d = np.sqrt((rx_e - rx_ce) ** 2 + dq * dq + vz * vz)
            d_rx[r] = d
            ang = k_wave * d
            cos_rx[r] = np.cos(ang)
            sin_rx[r] = np.sin(ang)

        acc_re = 0.0
        acc_im = 0.0
        for t in range(n_tx):
            dt = d_tx[t]
            ct = cos_tx[t]
            st = sin_tx[t]
            for r in range(n_rx):
                tau = (dt + d_rx[r]) / c
                u = (tau - t0) * fs + lag_samples
                k0 = int(np.floor(u))
                frac = u - k0
                s_re = 0.0
                s_im = 0.0
                if 0 <= k0 < n_t:
                    v = traces[t, r, k0]
                    s_re += (1.0 - frac) * v.real
                    s_im += (1.0 - frac) * v.imag
                k1 = k0 + 1
                if 0 <= k1 < n_t:
                    v = traces[t, r, k1]
                    s_re += frac * v.real
                    s_im += frac * v.imag
                # rotate by exp(+j 2 pi f0 tau), split per leg
                rc = ct * cos_rx[r] - st * sin_rx[r]
                rs = ct * sin_rx[r] + st * cos_rx[r]
                w = rx_w[r]
                acc_re += w * (s_re * rc - s_im * rs)
                acc_im += w * (s_re * rs + s_im * rc)
        out[ix, iy, iz] = complex(acc_re, acc_im)
