"""Non-response (implicit) regression analysis of hurricane best tracks against buoy conditions."""

__version__ = "0.1.0"
