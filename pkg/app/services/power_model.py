"""
Analog beamforming power accounting: MBAA selection network vs PS-aided full array.
RF chains and PD/PC are common to both and left out.
"""
from app.schemas.power import PowerParams, PowerReport


class PowerModel:

    @staticmethod
    def paths(params: PowerParams) -> int:
        """Antenna-to-RF-chain connections in a fully connected network."""
        return params.n_antennas * params.n_rf_chains

    def analog_power_delta(self, params: PowerParams) -> float:
        """Extra mW a multi-bit phased array spends over an MBAA (not clamped at zero)."""
        return self.paths(params) * (
            params.p_multibit_ps_mw - params.p_1bit_ps_mw - params.p_switch_mw
        )

    def switch_only_power(self, params: PowerParams) -> float:
        """Selection network with every 1-bit phase shifter removed."""
        return self.paths(params) * params.p_switch_mw

    def architecture_totals(self, params: PowerParams) -> PowerReport:
        paths = self.paths(params)
        return PowerReport(
            mbaa_mw=paths * (params.p_1bit_ps_mw + params.p_switch_mw),
            phased_array_mw=paths * params.p_multibit_ps_mw,
            switch_only_mw=self.switch_only_power(params),
            delta_mw=self.analog_power_delta(params),
        )


power_model = PowerModel()
