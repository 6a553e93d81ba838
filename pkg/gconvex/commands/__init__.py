"""Command surface: registry, router and command tools"""
