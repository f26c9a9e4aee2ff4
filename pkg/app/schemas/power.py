from pydantic import BaseModel, Field


class PowerParams(BaseModel):
    n_antennas: int = Field(default=64, ge=1)
    n_rf_chains: int = Field(default=8, ge=1)
    p_multibit_ps_mw: float = Field(default=30.0, ge=0)
    p_1bit_ps_mw: float = Field(default=5.0, ge=0)
    p_switch_mw: float = Field(default=5.0, ge=0)


class PowerReport(BaseModel):
    mbaa_mw: float
    phased_array_mw: float
    switch_only_mw: float
    delta_mw: float
