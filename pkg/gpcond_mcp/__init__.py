"""gpcond MCP Server - Gaussian process conditioning tools for AI agents."""

__version__ = "0.1.0"
